#include "epipolar/synthetic.h"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "epipolar/epipolar.h"
#include "epipolar/error.h"
#include "epipolar/random.h"

namespace epipolar {
namespace {

[[noreturn]] void Invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

bool InImage(const Vec2& p, double width, double height) {
  return p.x() >= 0.0 && p.x() < width && p.y() >= 0.0 && p.y() < height;
}

}  // namespace

CameraRig SceneConfig::DefaultRig() {
  CameraRig rig;
  rig.k1 = {720.0, 720.0, 620.0, 187.0, 0.0};
  rig.k2 = rig.k1;
  rig.pose.rotation = Mat3::Identity();
  rig.pose.translation = Vec3(0.54, 0.0, 0.0);
  return rig;
}

void SceneConfig::Validate() const {
  if (num_points < 8) Invalid("num_points >= 8 required");
  if (!(image_width > 0.0) || !(image_height > 0.0)) {
    Invalid("image_width and image_height must be positive");
  }
  if (!(depth_near > 0.0)) Invalid("depth_range: near > 0 required");
  if (!(depth_far > depth_near)) Invalid("depth_range: far > near required");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    Invalid("noise_sigma must be finite and >= 0");
  }
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) {
    Invalid("outlier_fraction must be in [0, 1)");
  }
  ValidateIntrinsics(rig.k1);
  ValidateIntrinsics(rig.k2);
  ValidateRotation(rig.pose.rotation);
  if (!(rig.pose.translation.norm() > 1e-12)) {
    throw Error(ErrorCode::kZeroTranslation, "rig translation is zero");
  }
}

Scene GenerateScene(const SceneConfig& cfg) {
  cfg.Validate();
  const FundamentalMatrix f_gt = FundamentalFromRig(cfg.rig);
  const Mat3 k1_inv = cfg.rig.k1.Matrix().inverse();
  const Mat3 k2 = cfg.rig.k2.Matrix();
  const Mat3& rotation = cfg.rig.pose.rotation;
  const Vec3& translation = cfg.rig.pose.translation;

  Rng rng(cfg.seed);
  const double near3 = std::pow(cfg.depth_near, 3);
  const double far3 = std::pow(cfg.depth_far, 3);
  const std::size_t max_candidates = 100 * cfg.num_points + 1000;

  std::vector<Correspondence> clean;
  clean.reserve(cfg.num_points);
  for (std::size_t attempt = 0;
       attempt < max_candidates && clean.size() < cfg.num_points; ++attempt) {
    const Vec2 m(rng.Uniform(0.0, cfg.image_width),
                 rng.Uniform(0.0, cfg.image_height));
    // Depth density proportional to z^2 gives uniform density in volume.
    const double depth = std::cbrt(near3 + rng.Uniform() * (far3 - near3));
    const Vec3 point1 = depth * (k1_inv * Lift(m));
    const Vec3 point2 = rotation * point1 + translation;
    if (point2.z() <= 1e-9) continue;
    const Vec3 projected = k2 * point2;
    const Vec2 m_prime = projected.hnormalized();
    if (!InImage(m_prime, cfg.image_width, cfg.image_height)) continue;
    clean.push_back({m, m_prime, true});
  }
  if (clean.size() < cfg.num_points) {
    throw Error(ErrorCode::kInsufficientVisiblePoints,
                "only " + std::to_string(clean.size()) + " of " +
                    std::to_string(cfg.num_points) +
                    " points are visible in both images");
  }

  Scene scene{CorrespondenceSet{}, f_gt, clean};
  auto& pairs = scene.set.pairs;
  pairs = clean;
  if (cfg.noise_sigma > 0.0) {
    for (auto& pair : pairs) {
      pair.m.x() += rng.Normal(0.0, cfg.noise_sigma);
      pair.m.y() += rng.Normal(0.0, cfg.noise_sigma);
      pair.m_prime.x() += rng.Normal(0.0, cfg.noise_sigma);
      pair.m_prime.y() += rng.Normal(0.0, cfg.noise_sigma);
    }
  }

  const auto num_outliers = static_cast<std::size_t>(
      std::llround(cfg.outlier_fraction * static_cast<double>(cfg.num_points)));
  for (const std::size_t i : rng.SampleDistinct(pairs.size(), num_outliers)) {
    auto& pair = pairs[i];
    for (int draw = 0; draw < kOutlierRedraws; ++draw) {
      pair.m_prime = Vec2(rng.Uniform(0.0, cfg.image_width),
                          rng.Uniform(0.0, cfg.image_height));
      double sed = 0.0;
      try {
        sed = SymmetricEpipolarDistance(f_gt, pair.m, pair.m_prime);
      } catch (const Error&) {
        break;
      }
      if (sed >= kAccidentalInlierThreshold) break;
    }
    pair.is_true_inlier = false;
  }
  return scene;
}

std::vector<double> OracleWeights(const CorrespondenceSet& set) {
  std::vector<double> weights;
  weights.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& flag = set.pairs[i].is_true_inlier;
    if (!flag.has_value()) {
      throw Error(ErrorCode::kMissingFlags,
                  "pair " + std::to_string(i) + " has no ground-truth flag", i);
    }
    weights.push_back(*flag ? 1.0 : 0.0);
  }
  return weights;
}

CameraRig RandomRig(std::uint64_t seed) {
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  CameraRig rig;
  const double f1 = rng.Uniform(600.0, 900.0);
  rig.k1 = {f1, f1 * rng.Uniform(0.98, 1.02), 620.0 + rng.Uniform(-20.0, 20.0),
            187.0 + rng.Uniform(-10.0, 10.0), 0.0};
  const double f2 = f1 * rng.Uniform(0.95, 1.05);
  rig.k2 = {f2, f2 * rng.Uniform(0.98, 1.02), 620.0 + rng.Uniform(-20.0, 20.0),
            187.0 + rng.Uniform(-10.0, 10.0), 0.0};

  Vec3 axis(rng.Normal(0.0, 1.0), rng.Normal(0.0, 1.0), rng.Normal(0.0, 1.0));
  axis.normalize();
  const double angle = rng.Uniform(0.0, 3.0) * std::numbers::pi / 180.0;
  rig.pose.rotation = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
  const Vec3 direction(1.0, rng.Uniform(-0.1, 0.1), rng.Uniform(-0.1, 0.1));
  rig.pose.translation = direction.normalized() * rng.Uniform(0.3, 0.8);
  return rig;
}

}  // namespace epipolar
