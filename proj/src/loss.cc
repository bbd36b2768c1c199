#include "epipolar/loss.h"

#include <cmath>

#include "epipolar/error.h"
#include "epipolar/metrics.h"

namespace epipolar {

void LossConfig::Validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !(gamma >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "loss coefficients must be non-negative");
  }
  if (!(inlier_threshold > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "inlier_threshold must be > 0");
  }
}

std::pair<double, double> LossL1L2(const Mat3& f_hat, const Mat3& f_gt,
                                   const LossConfig& cfg) {
  cfg.Validate();
  if (!IsCanonical(f_hat) || !IsCanonical(f_gt)) {
    throw Error(ErrorCode::kNonCanonicalInput,
                "loss inputs must be canonical rank-2 matrices");
  }
  double l1 = 0.0;
  double l2 = 0.0;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      const double d = f_hat(r, c) - f_gt(r, c);
      l1 += std::abs(d);
      l2 += d * d;
    }
  }
  if (cfg.l2_unsquared) l2 = std::sqrt(l2);
  return {cfg.alpha * l1, cfg.beta * l2};
}

std::pair<double, double> LossL1L2(const FundamentalMatrix& f_hat,
                                   const FundamentalMatrix& f_gt,
                                   const LossConfig& cfg) {
  return LossL1L2(f_hat.matrix(), f_gt.matrix(), cfg);
}

double LossEpipolar(const FundamentalMatrix& f_hat,
                    const CorrespondenceSet& set,
                    const FundamentalMatrix& f_gt, const LossConfig& cfg) {
  cfg.Validate();
  if (set.empty()) throw Error(ErrorCode::kEmptySet, "no correspondences");
  const CorrespondenceSet inliers =
      SelectInliers(set, f_gt, cfg.inlier_threshold);
  return cfg.gamma * MetricEc(f_hat, inliers);
}

LossBreakdown LossTotal(const FundamentalMatrix& f_hat,
                        const FundamentalMatrix& f_gt,
                        const CorrespondenceSet& set, const LossConfig& cfg) {
  LossBreakdown out;
  std::tie(out.l1_term, out.l2_term) = LossL1L2(f_hat, f_gt, cfg);
  out.le_term = LossEpipolar(f_hat, set, f_gt, cfg);
  out.total = out.l1_term + out.l2_term + out.le_term;
  return out;
}

}  // namespace epipolar
