#pragma once

#include <string>

#include "epipolar/types.h"

namespace epipolar {

inline constexpr double kRankTolerance = 1e-9;
inline constexpr double kZeroEntryTolerance = 1e-15;
// Entries whose magnitudes agree with the maximum to this relative
// tolerance are tied for choosing the sign of the canonical form.
inline constexpr double kSignTieTolerance = 1e-9;

// A rank-2 3x3 matrix in canonical form: the largest absolute entry has
// magnitude exactly 1 and the first (row-major) entry tied with it is
// positive. Only the factory functions below can produce one.
class FundamentalMatrix {
 public:
  const Mat3& matrix() const { return m_; }
  double operator()(int row, int col) const { return m_(row, col); }

  bool operator==(const FundamentalMatrix& other) const {
    return m_ == other.m_;
  }

 private:
  explicit FundamentalMatrix(const Mat3& m) : m_(m) {}
  friend FundamentalMatrix NormalizeF(const Mat3& m);

  Mat3 m_;
};

// sigma_min / sigma_max of a 3x3 matrix (0 for the zero matrix).
double RankRatio(const Mat3& m);

// True when the max-abs entry has magnitude exactly 1, the first tied entry
// (row-major, kSignTieTolerance) is positive, and the rank ratio is within
// kRankTolerance.
bool IsCanonical(const Mat3& m);

// Divides by the max absolute value, signed so that the first tied entry
// (row-major) is positive.
// Throws kZeroMatrix for all-zero input and kNotRankTwo when the input is not
// rank 2 within kRankTolerance.
FundamentalMatrix NormalizeF(const Mat3& m);

// Frobenius-nearest rank-2 matrix via SVD truncation, then NormalizeF.
FundamentalMatrix EnforceRank2(const Mat3& m);

// F = K2^-T [t]x R K1^-1, canonicalized.
FundamentalMatrix FundamentalFromCameras(const CameraIntrinsics& k1,
                                         const CameraIntrinsics& k2,
                                         const RelativePose& pose);
FundamentalMatrix FundamentalFromRig(const CameraRig& rig);

// Throws kInvalidRotation unless R^T R = I and det R = +1 within tolerance.
void ValidateRotation(const Mat3& rotation, double tolerance = 1e-9);
void ValidateIntrinsics(const CameraIntrinsics& k);

Mat3 CrossProductMatrix(const Vec3& v);

// Assembles [f1 | f2 | alpha*f1 + beta*f2] and canonicalizes.
FundamentalMatrix ReconstructRank2(const RankTwoParams& params);

// Inverse of ReconstructRank2 on canonical representatives: f1, f2 are the
// first two columns and (alpha, beta) the least-squares fit of the third.
RankTwoParams DecomposeRank2(const FundamentalMatrix& f);

// Nine numbers, row-major, 17 significant digits, three per line.
std::string FormatF(const FundamentalMatrix& f);
// Accepts arbitrary whitespace and '#' comment lines. Throws kParseError
// unless exactly nine numbers are present; the result is canonicalized.
FundamentalMatrix ParseF(const std::string& text);

}  // namespace epipolar
