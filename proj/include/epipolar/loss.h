#pragma once

#include <utility>

#include "epipolar/fundamental_matrix.h"
#include "epipolar/types.h"

namespace epipolar {

struct LossConfig {
  double alpha = 0.1;
  double beta = 0.01;
  double gamma = 0.001;
  double inlier_threshold = 1e-2;
  // Use the plain Frobenius norm instead of the elementwise squared sum.
  bool l2_unsquared = false;

  void Validate() const;
};

struct LossBreakdown {
  double l1_term = 0.0;
  double l2_term = 0.0;
  double le_term = 0.0;
  double total = 0.0;
};

// (alpha * sum|dF|, beta * sum dF^2). Throws kNonCanonicalInput.
std::pair<double, double> LossL1L2(const Mat3& f_hat, const Mat3& f_gt,
                                   const LossConfig& cfg);
std::pair<double, double> LossL1L2(const FundamentalMatrix& f_hat,
                                   const FundamentalMatrix& f_gt,
                                   const LossConfig& cfg);

// gamma * mean |m'^T F_hat m| over the pairs f_gt accepts as inliers.
double LossEpipolar(const FundamentalMatrix& f_hat,
                    const CorrespondenceSet& set,
                    const FundamentalMatrix& f_gt, const LossConfig& cfg);

LossBreakdown LossTotal(const FundamentalMatrix& f_hat,
                        const FundamentalMatrix& f_gt,
                        const CorrespondenceSet& set, const LossConfig& cfg);

}  // namespace epipolar
