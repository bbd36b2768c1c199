#include "epipolar/fundamental_matrix.h"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "epipolar/error.h"

namespace epipolar {
namespace {

bool AllFinite(const Mat3& m) { return m.allFinite(); }

double MaxAbs(const Mat3& m) { return m.cwiseAbs().maxCoeff(); }

// Row-major index of the first entry whose magnitude is within
// kSignTieTolerance (relative) of the maximum. Entries that close count as
// tied, so rounding noise cannot flip the sign of a canonical form.
std::pair<int, int> SignPivot(const Mat3& m) {
  const double floor = MaxAbs(m) * (1.0 - kSignTieTolerance);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (std::abs(m(r, c)) >= floor) return {r, c};
    }
  }
  return {0, 0};
}

Mat3 InverseIntrinsics(const CameraIntrinsics& k) {
  ValidateIntrinsics(k);
  // Upper triangular with unit last row.
  Mat3 inv;
  inv << 1.0 / k.fx, -k.skew / (k.fx * k.fy),
      (k.skew * k.cy - k.cx * k.fy) / (k.fx * k.fy), 0.0, 1.0 / k.fy,
      -k.cy / k.fy, 0.0, 0.0, 1.0;
  return inv;
}

}  // namespace

double RankRatio(const Mat3& m) {
  const Eigen::JacobiSVD<Mat3> svd(m);
  const Vec3& s = svd.singularValues();
  if (s(0) == 0.0) return 0.0;
  return s(2) / s(0);
}

bool IsCanonical(const Mat3& m) {
  if (!AllFinite(m) || MaxAbs(m) != 1.0) return false;
  const auto [r, c] = SignPivot(m);
  return m(r, c) > 0.0 && RankRatio(m) <= kRankTolerance;
}

FundamentalMatrix NormalizeF(const Mat3& m) {
  if (!AllFinite(m)) {
    throw Error(ErrorCode::kInvalidArgument, "matrix has non-finite entries");
  }
  const double scale = MaxAbs(m);
  if (scale <= kZeroEntryTolerance) {
    throw Error(ErrorCode::kZeroMatrix, "all entries are (near) zero");
  }
  const auto [r, c] = SignPivot(m);
  const double divisor = m(r, c) > 0.0 ? scale : -scale;
  // Adding +0.0 turns negative zeros into positive ones.
  Mat3 out = (m / divisor).array() + 0.0;
  if (RankRatio(out) > kRankTolerance) {
    throw Error(ErrorCode::kNotRankTwo,
                "matrix is not rank 2 (sigma_min/sigma_max = " +
                    std::to_string(RankRatio(out)) + ")");
  }
  return FundamentalMatrix(out);
}

FundamentalMatrix EnforceRank2(const Mat3& m) {
  if (!AllFinite(m)) {
    throw Error(ErrorCode::kInvalidArgument, "matrix has non-finite entries");
  }
  if (m.cwiseAbs().maxCoeff() <= kZeroEntryTolerance) {
    throw Error(ErrorCode::kZeroMatrix, "all entries are (near) zero");
  }
  const Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec3 s = svd.singularValues();
  s(2) = 0.0;
  const Mat3 truncated =
      svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  return NormalizeF(truncated);
}

void ValidateRotation(const Mat3& rotation, double tolerance) {
  if (!AllFinite(rotation)) {
    throw Error(ErrorCode::kInvalidRotation, "non-finite entries");
  }
  const double ortho =
      (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho > tolerance) {
    throw Error(ErrorCode::kInvalidRotation,
                "R^T R deviates from identity by " + std::to_string(ortho));
  }
  const double det = rotation.determinant();
  if (std::abs(det - 1.0) > tolerance) {
    throw Error(ErrorCode::kInvalidRotation,
                "determinant is " + std::to_string(det) + ", expected +1");
  }
}

void ValidateIntrinsics(const CameraIntrinsics& k) {
  if (!std::isfinite(k.fx) || !std::isfinite(k.fy) || !std::isfinite(k.cx) ||
      !std::isfinite(k.cy) || !std::isfinite(k.skew)) {
    throw Error(ErrorCode::kSingularIntrinsics, "non-finite intrinsics");
  }
  if (k.fx == 0.0 || k.fy == 0.0) {
    throw Error(ErrorCode::kSingularIntrinsics,
                "zero focal length makes K non-invertible");
  }
  if (k.fx < 0.0 || k.fy < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "focal lengths must be positive");
  }
}

Mat3 CrossProductMatrix(const Vec3& v) {
  Mat3 out;
  out << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return out;
}

FundamentalMatrix FundamentalFromCameras(const CameraIntrinsics& k1,
                                         const CameraIntrinsics& k2,
                                         const RelativePose& pose) {
  if (!pose.translation.allFinite() || pose.translation.norm() <= 1e-12) {
    throw Error(ErrorCode::kZeroTranslation,
                "F is undefined for a pure rotation");
  }
  ValidateRotation(pose.rotation);
  const Mat3 k1_inv = InverseIntrinsics(k1);
  const Mat3 k2_inv = InverseIntrinsics(k2);
  const Mat3 f = k2_inv.transpose() * CrossProductMatrix(pose.translation) *
                 pose.rotation * k1_inv;
  // Rank 2 by construction; truncation only absorbs round-off.
  if (RankRatio(f) <= 1e-12) return NormalizeF(f);
  return EnforceRank2(f);
}

FundamentalMatrix FundamentalFromRig(const CameraRig& rig) {
  return FundamentalFromCameras(rig.k1, rig.k2, rig.pose);
}

FundamentalMatrix ReconstructRank2(const RankTwoParams& params) {
  const double cross = params.f1.cross(params.f2).norm();
  const double scale = params.f1.norm() * params.f2.norm();
  if (!(cross > 1e-12 * scale) || scale == 0.0) {
    throw Error(ErrorCode::kDependentColumns,
                "f1 and f2 are (nearly) linearly dependent");
  }
  Mat3 m;
  m.col(0) = params.f1;
  m.col(1) = params.f2;
  m.col(2) = params.alpha * params.f1 + params.beta * params.f2;
  return NormalizeF(m);
}

RankTwoParams DecomposeRank2(const FundamentalMatrix& f) {
  RankTwoParams params;
  params.f1 = f.matrix().col(0);
  params.f2 = f.matrix().col(1);
  const double cross = params.f1.cross(params.f2).norm();
  const double scale = params.f1.norm() * params.f2.norm();
  if (!(cross > 1e-12 * scale) || scale == 0.0) {
    throw Error(ErrorCode::kDependentColumns,
                "first two columns are (nearly) linearly dependent");
  }
  Eigen::Matrix<double, 3, 2> basis;
  basis << params.f1, params.f2;
  const Eigen::Vector2d coeffs =
      basis.colPivHouseholderQr().solve(Vec3(f.matrix().col(2)));
  params.alpha = coeffs(0);
  params.beta = coeffs(1);
  return params;
}

std::string FormatF(const FundamentalMatrix& f) {
  std::string out;
  char buf[64];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", f(r, c));
      out += buf;
      out += c < 2 ? ' ' : '\n';
    }
  }
  return out;
}

FundamentalMatrix ParseF(const std::string& text) {
  std::istringstream lines(text);
  std::string line;
  std::vector<double> values;
  while (std::getline(lines, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream tokens(line);
    std::string token;
    while (tokens >> token) {
      std::size_t consumed = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &consumed);
      } catch (const std::exception&) {
        consumed = 0;
      }
      if (consumed != token.size()) {
        throw Error(ErrorCode::kParseError,
                    "expected 9 whitespace-separated numbers (row-major F); "
                    "got non-numeric token '" + token + "'");
      }
      values.push_back(v);
    }
  }
  if (values.size() != 9) {
    throw Error(ErrorCode::kParseError,
                "expected 9 whitespace-separated numbers (row-major F), found " +
                    std::to_string(values.size()));
  }
  Mat3 m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = values[i];
  return NormalizeF(m);
}

}  // namespace epipolar
