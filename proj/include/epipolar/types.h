#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

namespace epipolar {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Pixel point lifted to homogeneous coordinates with w = 1.
inline Vec3 Lift(const Vec2& m) { return Vec3(m.x(), m.y(), 1.0); }

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double skew = 0.0;

  Mat3 Matrix() const {
    Mat3 k;
    k << fx, skew, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
    return k;
  }
};

// Maps camera-1 coordinates into camera 2: X2 = rotation * X1 + translation.
struct RelativePose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::UnitX();
};

struct CameraRig {
  CameraIntrinsics k1;
  CameraIntrinsics k2;
  RelativePose pose;
};

// Line a*x + b*y + c = 0.
struct EpipolarLine {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

// Rank-2 parameterization: columns [f1 | f2 | alpha*f1 + beta*f2].
struct RankTwoParams {
  Vec3 f1 = Vec3::Zero();
  Vec3 f2 = Vec3::Zero();
  double alpha = 0.0;
  double beta = 0.0;
};

struct Correspondence {
  Vec2 m = Vec2::Zero();
  Vec2 m_prime = Vec2::Zero();
  // Ground-truth membership; only known for synthetic data.
  std::optional<bool> is_true_inlier;
};

struct CorrespondenceSet {
  std::vector<Correspondence> pairs;
  std::optional<std::vector<double>> weights;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  bool HasFlags() const;
  // Throws kInvalidArgument when weights are present with a mismatched length.
  void Validate() const;
  CorrespondenceSet Subset(const std::vector<std::size_t>& indices) const;
};

}  // namespace epipolar
