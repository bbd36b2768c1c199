#pragma once

#include <cstdint>
#include <span>

#include "epipolar/epipolar.h"
#include "epipolar/fundamental_matrix.h"
#include "epipolar/types.h"

namespace epipolar {

struct MetricsConfig {
  double inlier_threshold = 1e-2;
  std::size_t sample_size = 40;
  double angle_point_tolerance = 1.0;
  std::uint64_t seed = 0;
  // Also measure angles in image 1 (lines F^T m') and average both.
  bool angle_both_directions = false;
  SedVariant sed_variant = SedVariant::kTransposed;

  void Validate() const;
};

struct MetricsReport {
  double m_ec = 0.0;
  double m_ed = 0.0;
  // 90 when every pair was an angle outlier; see n_angle_inliers.
  double m_ea_degrees = 0.0;
  std::size_t n_used = 0;
  std::size_t n_angle_inliers = 0;
  std::size_t n_angle_outliers = 0;
  double angle_point_tolerance = 0.0;
};

struct AngleResult {
  double mean_degrees = 0.0;
  std::size_t n_inliers = 0;
  std::size_t n_outliers = 0;
};

// Pairwise summation in index order.
double PairwiseSum(std::span<const double> values);

// Pairs with SED under f_gt strictly below the threshold, then a seeded
// uniform draw of sample_size of them (order preserved). Throws kNoInliers.
CorrespondenceSet FilterInliers(const CorrespondenceSet& set,
                                const FundamentalMatrix& f_gt,
                                const MetricsConfig& cfg);
// Same selection rule without the down-sampling.
CorrespondenceSet SelectInliers(const CorrespondenceSet& set,
                                const FundamentalMatrix& f_gt,
                                double threshold);

double MetricEc(const FundamentalMatrix& f, const CorrespondenceSet& set);
double MetricEd(const FundamentalMatrix& f, const CorrespondenceSet& set,
                SedVariant variant = SedVariant::kTransposed);
// Throws kAllAngleOutliers when no pair passes the through-point rule.
AngleResult MetricEa(const FundamentalMatrix& f_est,
                     const FundamentalMatrix& f_gt,
                     const CorrespondenceSet& set, const MetricsConfig& cfg);

// Unoriented angle between two lines in degrees, in [0, 90].
double LineAngleDegrees(const EpipolarLine& l1, const EpipolarLine& l2);

MetricsReport Evaluate(const FundamentalMatrix& f_est,
                       const FundamentalMatrix& f_gt,
                       const CorrespondenceSet& set, const MetricsConfig& cfg);

}  // namespace epipolar
