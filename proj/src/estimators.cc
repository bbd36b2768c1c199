#include "epipolar/estimators.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "epipolar/epipolar.h"
#include "epipolar/error.h"
#include "epipolar/random.h"

namespace epipolar {
namespace {

constexpr std::size_t kMinimalSample = 8;
constexpr double kMinIrlsWeight = 1e-12;
constexpr double kMaxIrlsWeight = 1e12;

// Solves the (optionally weighted) homogeneous system. `relative_weights`
// is either empty (all ones) or aligned with set.pairs and scaled to max 1.
// Pairs with zero weight do not enter the design matrix at all.
FundamentalMatrix SolveLinear(const CorrespondenceSet& set,
                              std::span<const double> relative_weights,
                              const EstimatorConfig& cfg) {
  std::vector<std::size_t> active;
  active.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (relative_weights.empty() || relative_weights[i] > 0.0) {
      active.push_back(i);
    }
  }
  if (active.size() < kMinimalSample) {
    throw Error(ErrorCode::kTooFewPoints,
                "need at least 8 correspondences with positive weight, got " +
                    std::to_string(active.size()));
  }

  Mat3 t1 = Mat3::Identity();
  Mat3 t2 = Mat3::Identity();
  if (cfg.hartley_normalization) {
    std::vector<Vec2> points1;
    std::vector<Vec2> points2;
    points1.reserve(active.size());
    points2.reserve(active.size());
    for (const std::size_t i : active) {
      points1.push_back(set.pairs[i].m);
      points2.push_back(set.pairs[i].m_prime);
    }
    t1 = HartleyConditioner(points1);
    t2 = HartleyConditioner(points2);
  }

  const auto rows =
      static_cast<Eigen::Index>(std::max<std::size_t>(active.size(), 9));
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(rows, 9);
  for (std::size_t k = 0; k < active.size(); ++k) {
    const std::size_t i = active[k];
    const Vec3 p = t1 * Lift(set.pairs[i].m);
    const Vec3 q = t2 * Lift(set.pairs[i].m_prime);
    const double scale =
        relative_weights.empty() ? 1.0 : std::sqrt(relative_weights[i]);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        design(static_cast<Eigen::Index>(k), 3 * r + c) = scale * q(r) * p(c);
      }
    }
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (!(sv(7) - sv(8) > 1e-12 * sv(0))) {
    throw Error(ErrorCode::kDegenerateConfiguration,
                "null space of the design matrix is not one-dimensional");
  }
  const Eigen::VectorXd f = svd.matrixV().col(8);
  Mat3 conditioned;
  for (int i = 0; i < 9; ++i) conditioned(i / 3, i % 3) = f(i);
  return EnforceRank2(t2.transpose() * conditioned * t1);
}

double WeightedAlgebraicError(const FundamentalMatrix& f,
                              const CorrespondenceSet& set,
                              std::span<const double> weights) {
  double total = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double r = EpipolarResidual(f, set.pairs[i].m, set.pairs[i].m_prime);
    total += (weights.empty() ? 1.0 : weights[i]) * r * r;
  }
  return total;
}

struct Support {
  std::size_t count = 0;
  double sed_sum = 0.0;
  std::vector<bool> mask;
};

Support MeasureSupport(const FundamentalMatrix& f, const CorrespondenceSet& set,
                       double threshold) {
  Support support;
  support.mask.assign(set.size(), false);
  for (std::size_t i = 0; i < set.size(); ++i) {
    double sed = 0.0;
    try {
      sed = SymmetricEpipolarDistance(f, set.pairs[i].m, set.pairs[i].m_prime);
    } catch (const Error&) {
      continue;
    }
    if (sed < threshold) {
      support.mask[i] = true;
      ++support.count;
      support.sed_sum += sed;
    }
  }
  return support;
}

bool BetterSupport(const Support& candidate, const Support& incumbent) {
  return candidate.count > incumbent.count ||
         (candidate.count == incumbent.count &&
          candidate.sed_sum < incumbent.sed_sum);
}

double ObjectiveOrInfinity(const FundamentalMatrix& f,
                           const CorrespondenceSet& set) {
  try {
    return SedObjective(f, set);
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

void EstimatorConfig::Validate() const {
  if (ransac_iterations < 1 || irls_max_iters < 1) {
    throw Error(ErrorCode::kInvalidArgument, "iterations must be >= 1");
  }
  if (!(ransac_inlier_threshold > 0.0) || !(irls_tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "thresholds must be > 0");
  }
  if (!(min_weight_mass >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "min_weight_mass must be >= 0");
  }
}

Mat3 HartleyConditioner(const std::vector<Vec2>& points) {
  Vec2 centroid = Vec2::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  double mean_distance = 0.0;
  for (const auto& p : points) mean_distance += (p - centroid).norm();
  mean_distance /= static_cast<double>(points.size());
  if (!(mean_distance > 1e-12 * (1.0 + centroid.norm()))) {
    throw Error(ErrorCode::kDegenerateConfiguration,
                "all points in one image coincide");
  }
  const double s = std::sqrt(2.0) / mean_distance;
  Mat3 t;
  t << s, 0.0, -s * centroid.x(), 0.0, s, -s * centroid.y(), 0.0, 0.0, 1.0;
  return t;
}

EstimationResult EightPoint(const CorrespondenceSet& set,
                            const EstimatorConfig& cfg) {
  cfg.Validate();
  if (set.size() < kMinimalSample) {
    throw Error(ErrorCode::kTooFewPoints,
                "8-point needs at least 8 pairs, got " +
                    std::to_string(set.size()));
  }
  FundamentalMatrix f = SolveLinear(set, {}, cfg);
  const double score = WeightedAlgebraicError(f, set, {});
  return {f, std::vector<bool>(set.size(), true), score, 1};
}

EstimationResult WeightedEightPoint(const CorrespondenceSet& set,
                                    std::span<const double> weights,
                                    const EstimatorConfig& cfg) {
  cfg.Validate();
  if (weights.size() != set.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "weights length does not match the number of pairs");
  }
  double mass = 0.0;
  double max_weight = 0.0;
  for (const double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "weights must be finite and non-negative");
    }
    mass += w;
    max_weight = std::max(max_weight, w);
  }
  if (mass < cfg.min_weight_mass || max_weight == 0.0) {
    throw Error(ErrorCode::kInsufficientWeightMass,
                "total weight " + std::to_string(mass) + " is below " +
                    std::to_string(cfg.min_weight_mass));
  }
  // The objective is homogeneous in w; scaling to max 1 makes uniform
  // weights reduce to the unweighted system exactly.
  std::vector<double> relative(weights.begin(), weights.end());
  for (double& w : relative) w /= max_weight;

  FundamentalMatrix f = SolveLinear(set, relative, cfg);
  std::vector<bool> mask(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) mask[i] = weights[i] > 0.0;
  const double score = WeightedAlgebraicError(f, set, weights);
  return {f, std::move(mask), score, 1};
}

EstimationResult Ransac(const CorrespondenceSet& set,
                        const EstimatorConfig& cfg, RansacStats* stats) {
  cfg.Validate();
  if (set.size() < kMinimalSample) {
    throw Error(ErrorCode::kTooFewPoints,
                "RANSAC needs at least 8 pairs, got " +
                    std::to_string(set.size()));
  }
  RansacStats local;
  Rng rng(cfg.ransac_seed);
  std::optional<FundamentalMatrix> best_model;
  Support best;
  bool have_first = false;

  for (std::size_t iter = 0; iter < cfg.ransac_iterations; ++iter) {
    const CorrespondenceSet sample =
        set.Subset(rng.SampleDistinct(set.size(), kMinimalSample));
    std::optional<FundamentalMatrix> model;
    try {
      model = SolveLinear(sample, {}, cfg);
    } catch (const Error&) {
      ++local.degenerate_samples;
      continue;
    }
    Support support =
        MeasureSupport(*model, set, cfg.ransac_inlier_threshold);
    if (!have_first) {
      local.first_valid_support = support.count;
      have_first = true;
    }
    if (!best_model || BetterSupport(support, best)) {
      best_model = model;
      best = std::move(support);
    }
  }
  if (!best_model) {
    throw Error(ErrorCode::kNoValidSample,
                "every sampled minimal set was degenerate");
  }
  local.best_sample_support = best.count;

  FundamentalMatrix final_model = *best_model;
  Support final_support = best;
  if (best.count >= kMinimalSample) {
    std::vector<std::size_t> consensus;
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (best.mask[i]) consensus.push_back(i);
    }
    try {
      const FundamentalMatrix refit = SolveLinear(set.Subset(consensus), {}, cfg);
      Support refit_support =
          MeasureSupport(refit, set, cfg.ransac_inlier_threshold);
      // Never report less support than the best sampled model.
      if (refit_support.count >= best.count) {
        final_model = refit;
        final_support = std::move(refit_support);
        local.refit_accepted = true;
      }
    } catch (const Error&) {
    }
  }
  if (stats) *stats = local;
  return {final_model, std::move(final_support.mask),
          static_cast<double>(final_support.count), cfg.ransac_iterations};
}

EstimationResult IrlsSed(const CorrespondenceSet& set,
                         const FundamentalMatrix& init,
                         const EstimatorConfig& cfg) {
  cfg.Validate();
  const std::size_t n = set.size();
  if (n < kMinimalSample) {
    throw Error(ErrorCode::kTooFewPoints,
                "IRLS needs at least 8 pairs, got " + std::to_string(n));
  }

  FundamentalMatrix current = init;
  FundamentalMatrix best = init;
  double best_objective = ObjectiveOrInfinity(init, set);
  std::size_t iterations = 0;
  std::vector<double> weights(n);

  for (std::size_t k = 1; k <= cfg.irls_max_iters; ++k) {
    const Mat3& f = current.matrix();
    bool all_clamped = true;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 line2 = f * Lift(set.pairs[i].m);
      const Vec3 line1 = f.transpose() * Lift(set.pairs[i].m_prime);
      const double g2 = line2.head<2>().squaredNorm();
      const double g1 = line1.head<2>().squaredNorm();
      const double w = std::clamp(1.0 / g2 + 1.0 / g1, kMinIrlsWeight,
                                  kMaxIrlsWeight);
      all_clamped = all_clamped && (w == kMinIrlsWeight || w == kMaxIrlsWeight);
      weights[i] = w;
    }
    if (all_clamped) {
      throw Error(ErrorCode::kDivergedToDegenerate,
                  "every IRLS weight hit a clamp bound");
    }
    const double mass = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double& w : weights) w *= static_cast<double>(n) / mass;

    const FundamentalMatrix next = WeightedEightPoint(set, weights, cfg).f;
    const double objective = ObjectiveOrInfinity(next, set);
    if (objective < best_objective) {
      best_objective = objective;
      best = next;
    }
    const double change = (next.matrix() - current.matrix()).norm();
    current = next;
    iterations = k;
    if (change < cfg.irls_tolerance) break;
  }

  return {best, MeasureSupport(best, set, cfg.ransac_inlier_threshold).mask,
          best_objective, iterations};
}

}  // namespace epipolar
