#include "epipolar/metrics.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "epipolar/error.h"
#include "epipolar/random.h"

namespace epipolar {
namespace {

void RequireNonEmpty(const CorrespondenceSet& set) {
  if (set.empty()) throw Error(ErrorCode::kEmptySet, "no correspondences");
}

EpipolarLine LineOrThrow(const Mat3& f, const Vec2& p, std::size_t index) {
  try {
    return ComputeEpipolarLine(f, p);
  } catch (const Error& e) {
    throw Error(e.code(), "pair " + std::to_string(index) + ": " + e.what(),
                index);
  }
}

std::optional<EpipolarLine> LineIfValid(const Mat3& f, const Vec2& p) {
  try {
    return ComputeEpipolarLine(f, p);
  } catch (const Error&) {
    return std::nullopt;
  }
}

// Angle between estimated and ground-truth lines of `point`, or nullopt when
// the estimated line misses `partner` by more than the tolerance.
std::optional<double> DirectionalAngle(const Mat3& f_est, const Mat3& f_gt,
                                       const Vec2& point, const Vec2& partner,
                                       double tolerance, std::size_t index) {
  const EpipolarLine gt = LineOrThrow(f_gt, point, index);
  const auto est = LineIfValid(f_est, point);
  if (!est || !(PointLineDistance(*est, partner) <= tolerance)) {
    return std::nullopt;
  }
  return LineAngleDegrees(*est, gt);
}

}  // namespace

void MetricsConfig::Validate() const {
  if (!(inlier_threshold > 0.0) || !(angle_point_tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "thresholds must be > 0");
  }
  if (sample_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "sample_size must be >= 1");
  }
}

double PairwiseSum(std::span<const double> values) {
  if (values.size() <= 8) {
    double total = 0.0;
    for (const double v : values) total += v;
    return total;
  }
  const std::size_t half = values.size() / 2;
  return PairwiseSum(values.first(half)) + PairwiseSum(values.subspan(half));
}

CorrespondenceSet SelectInliers(const CorrespondenceSet& set,
                                const FundamentalMatrix& f_gt,
                                double threshold) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < set.size(); ++i) {
    double sed = 0.0;
    try {
      sed = SymmetricEpipolarDistance(f_gt, set.pairs[i].m,
                                      set.pairs[i].m_prime);
    } catch (const Error&) {
      continue;
    }
    if (sed < threshold) kept.push_back(i);
  }
  if (kept.empty()) {
    throw Error(ErrorCode::kNoInliers,
                "no pair passes the ground-truth inlier threshold");
  }
  return set.Subset(kept);
}

CorrespondenceSet FilterInliers(const CorrespondenceSet& set,
                                const FundamentalMatrix& f_gt,
                                const MetricsConfig& cfg) {
  cfg.Validate();
  CorrespondenceSet inliers = SelectInliers(set, f_gt, cfg.inlier_threshold);
  if (inliers.size() <= cfg.sample_size) return inliers;
  Rng rng(cfg.seed);
  std::vector<std::size_t> chosen =
      rng.SampleDistinct(inliers.size(), cfg.sample_size);
  std::sort(chosen.begin(), chosen.end());
  return inliers.Subset(chosen);
}

double MetricEc(const FundamentalMatrix& f, const CorrespondenceSet& set) {
  RequireNonEmpty(set);
  std::vector<double> terms(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    terms[i] =
        std::abs(EpipolarResidual(f, set.pairs[i].m, set.pairs[i].m_prime));
  }
  return PairwiseSum(terms) / static_cast<double>(set.size());
}

double MetricEd(const FundamentalMatrix& f, const CorrespondenceSet& set,
                SedVariant variant) {
  RequireNonEmpty(set);
  std::vector<double> terms(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    try {
      terms[i] = SymmetricEpipolarDistance(f, set.pairs[i].m,
                                           set.pairs[i].m_prime, variant);
    } catch (const Error& e) {
      throw Error(e.code(), "pair " + std::to_string(i) + ": " + e.what(), i);
    }
  }
  return PairwiseSum(terms) / static_cast<double>(set.size());
}

double LineAngleDegrees(const EpipolarLine& l1, const EpipolarLine& l2) {
  // Same value as arccos(|n1.n2| / (|n1||n2|)) but well conditioned near 0.
  const double cross = std::abs(l1.a * l2.b - l1.b * l2.a);
  const double dot = std::abs(l1.a * l2.a + l1.b * l2.b);
  return std::atan2(cross, dot) * 180.0 / std::numbers::pi;
}

AngleResult MetricEa(const FundamentalMatrix& f_est,
                     const FundamentalMatrix& f_gt,
                     const CorrespondenceSet& set, const MetricsConfig& cfg) {
  RequireNonEmpty(set);
  AngleResult result;
  std::vector<double> angles;
  angles.reserve(set.size());
  const Mat3 est_t = f_est.matrix().transpose();
  const Mat3 gt_t = f_gt.matrix().transpose();
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& pair = set.pairs[i];
    std::optional<double> angle =
        DirectionalAngle(f_est.matrix(), f_gt.matrix(), pair.m, pair.m_prime,
                         cfg.angle_point_tolerance, i);
    if (angle && cfg.angle_both_directions) {
      const std::optional<double> reverse = DirectionalAngle(
          est_t, gt_t, pair.m_prime, pair.m, cfg.angle_point_tolerance, i);
      angle = reverse ? std::optional<double>(0.5 * (*angle + *reverse))
                      : std::nullopt;
    }
    if (angle) {
      angles.push_back(*angle);
    } else {
      ++result.n_outliers;
    }
  }
  result.n_inliers = angles.size();
  if (angles.empty()) {
    throw Error(ErrorCode::kAllAngleOutliers,
                "no estimated epipolar line passes through its corresponding "
                "point");
  }
  result.mean_degrees = PairwiseSum(angles) / static_cast<double>(angles.size());
  return result;
}

MetricsReport Evaluate(const FundamentalMatrix& f_est,
                       const FundamentalMatrix& f_gt,
                       const CorrespondenceSet& set, const MetricsConfig& cfg) {
  const CorrespondenceSet filtered = FilterInliers(set, f_gt, cfg);
  MetricsReport report;
  report.n_used = filtered.size();
  report.angle_point_tolerance = cfg.angle_point_tolerance;
  report.m_ec = MetricEc(f_est, filtered);
  report.m_ed = MetricEd(f_est, filtered, cfg.sed_variant);
  try {
    const AngleResult angle = MetricEa(f_est, f_gt, filtered, cfg);
    report.m_ea_degrees = angle.mean_degrees;
    report.n_angle_inliers = angle.n_inliers;
    report.n_angle_outliers = angle.n_outliers;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kAllAngleOutliers) throw;
    report.m_ea_degrees = 90.0;
    report.n_angle_inliers = 0;
    report.n_angle_outliers = filtered.size();
  }
  return report;
}

}  // namespace epipolar
