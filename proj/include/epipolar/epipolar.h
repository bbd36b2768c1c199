#pragma once

#include "epipolar/fundamental_matrix.h"
#include "epipolar/types.h"

namespace epipolar {

inline constexpr double kDegenerateLineTolerance = 1e-15;

// Which line the second denominator of the symmetric epipolar distance uses.
enum class SedVariant {
  kTransposed,  // F^T m', the epipolar line of m' in image 1
  kLiteral,     // F m', as the formula is sometimes written
};

// Epipolar line of m in image 2: F * [x, y, 1]^T. Throws kDegenerateLine
// when m is the epipole.
EpipolarLine ComputeEpipolarLine(const Mat3& f, const Vec2& m);
EpipolarLine ComputeEpipolarLine(const FundamentalMatrix& f, const Vec2& m);

// Signed m'^T F m.
double EpipolarResidual(const Mat3& f, const Vec2& m, const Vec2& m_prime);
double EpipolarResidual(const FundamentalMatrix& f, const Vec2& m,
                        const Vec2& m_prime);

// (1/|(Fm)_12|^2 + 1/|(F^T m')_12|^2) * (m'^T F m)^2.
double SymmetricEpipolarDistance(const Mat3& f, const Vec2& m,
                                 const Vec2& m_prime,
                                 SedVariant variant = SedVariant::kTransposed);
double SymmetricEpipolarDistance(const FundamentalMatrix& f, const Vec2& m,
                                 const Vec2& m_prime,
                                 SedVariant variant = SedVariant::kTransposed);

// Perpendicular distance from p to the line, in pixels.
double PointLineDistance(const EpipolarLine& line, const Vec2& p);

// Sum of symmetric epipolar distances over all pairs. Propagates
// kDegenerateLine with the pair index.
double SedObjective(const FundamentalMatrix& f, const CorrespondenceSet& set);

}  // namespace epipolar
