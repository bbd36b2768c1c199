#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "epipolar/fundamental_matrix.h"
#include "epipolar/types.h"

namespace epipolar {

struct EstimatorConfig {
  bool hartley_normalization = true;
  std::size_t ransac_iterations = 2000;
  double ransac_inlier_threshold = 1e-2;
  std::uint64_t ransac_seed = 0;
  std::size_t irls_max_iters = 50;
  double irls_tolerance = 1e-12;
  double min_weight_mass = 8.0;

  void Validate() const;
};

struct EstimationResult {
  FundamentalMatrix f;
  std::vector<bool> inlier_mask;
  // Linear solvers: weighted sum of squared algebraic residuals.
  // RANSAC: inlier count. IRLS: symmetric epipolar distance sum.
  double score = 0.0;
  std::size_t iterations_used = 0;
};

struct RansacStats {
  std::size_t first_valid_support = 0;
  std::size_t best_sample_support = 0;
  std::size_t degenerate_samples = 0;
  bool refit_accepted = false;
};

EstimationResult EightPoint(const CorrespondenceSet& set,
                            const EstimatorConfig& cfg);

// Minimizes sum_i w_i (m'_i^T F m_i)^2 over |f| = 1. Weights must be finite
// and non-negative; they are used relative to their maximum.
EstimationResult WeightedEightPoint(const CorrespondenceSet& set,
                                    std::span<const double> weights,
                                    const EstimatorConfig& cfg);

EstimationResult Ransac(const CorrespondenceSet& set,
                        const EstimatorConfig& cfg,
                        RansacStats* stats = nullptr);

// Iteratively reweighted least squares on the symmetric epipolar distance.
EstimationResult IrlsSed(const CorrespondenceSet& set,
                         const FundamentalMatrix& init,
                         const EstimatorConfig& cfg);

// Similarity that moves the centroid to the origin and scales the mean
// distance to sqrt(2).
Mat3 HartleyConditioner(const std::vector<Vec2>& points);

}  // namespace epipolar
