#pragma once

#include <cstdint>
#include <vector>

#include "epipolar/fundamental_matrix.h"
#include "epipolar/types.h"

namespace epipolar {

struct SceneConfig {
  std::uint64_t seed = 0;
  std::size_t num_points = 100;
  double image_width = 1240.0;
  double image_height = 375.0;
  double depth_near = 5.0;
  double depth_far = 50.0;
  double noise_sigma = 0.0;
  double outlier_fraction = 0.0;
  CameraRig rig = DefaultRig();

  // KITTI-like stereo pair: fx = fy = 720, principal point (620, 187),
  // 0.54 m baseline along x.
  static CameraRig DefaultRig();

  // Throws kInvalidArgument naming the offending field.
  void Validate() const;
};

struct Scene {
  CorrespondenceSet set;
  FundamentalMatrix f_gt;
  // Exact projections before noise and outlier replacement, aligned with set.
  std::vector<Correspondence> clean;
};

inline constexpr double kAccidentalInlierThreshold = 1e-2;
inline constexpr int kOutlierRedraws = 100;

// Deterministic in cfg. Points are drawn uniformly in volume over the camera-1
// frustum between the depth bounds and kept when visible in both images.
// Throws kInsufficientVisiblePoints when the visible fraction is too small.
Scene GenerateScene(const SceneConfig& cfg);

// 1 for true inliers, 0 for outliers. Throws kMissingFlags.
std::vector<double> OracleWeights(const CorrespondenceSet& set);

// A plausible stereo rig with randomized intrinsics, a rotation of up to a
// few degrees and a mostly lateral baseline.
CameraRig RandomRig(std::uint64_t seed);

}  // namespace epipolar
