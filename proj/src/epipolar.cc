#include "epipolar/epipolar.h"

#include <algorithm>
#include <array>
#include <cmath>

#include "epipolar/error.h"

namespace epipolar {
namespace {

bool IsDegenerate(double a, double b) {
  return std::abs(a) <= kDegenerateLineTolerance &&
         std::abs(b) <= kDegenerateLineTolerance;
}

// m'^T F m from its nine products, summed in magnitude order with Neumaier
// compensation. The term set is identical for (F, m, m') and (F^T, m', m),
// so the swapped evaluation returns the same bits.
double BilinearForm(const Mat3& f, const Vec3& x1, const Vec3& x2) {
  std::array<double, 9> terms;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) terms[3 * i + j] = (x2(i) * x1(j)) * f(i, j);
  }
  std::sort(terms.begin(), terms.end(), [](double a, double b) {
    return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a < b;
  });
  double sum = 0.0;
  double compensation = 0.0;
  for (const double t : terms) {
    const double next = sum + t;
    compensation += std::abs(sum) >= std::abs(t) ? (sum - next) + t
                                                 : (t - next) + sum;
    sum = next;
  }
  return sum + compensation;
}

}  // namespace

EpipolarLine ComputeEpipolarLine(const Mat3& f, const Vec2& m) {
  const Vec3 l = f * Lift(m);
  if (IsDegenerate(l.x(), l.y())) {
    throw Error(ErrorCode::kDegenerateLine, "point is at the epipole");
  }
  return {l.x(), l.y(), l.z()};
}

EpipolarLine ComputeEpipolarLine(const FundamentalMatrix& f, const Vec2& m) {
  return ComputeEpipolarLine(f.matrix(), m);
}

double EpipolarResidual(const Mat3& f, const Vec2& m, const Vec2& m_prime) {
  return BilinearForm(f, Lift(m), Lift(m_prime));
}

double EpipolarResidual(const FundamentalMatrix& f, const Vec2& m,
                        const Vec2& m_prime) {
  return EpipolarResidual(f.matrix(), m, m_prime);
}

double SymmetricEpipolarDistance(const Mat3& f, const Vec2& m,
                                 const Vec2& m_prime, SedVariant variant) {
  const Vec3 x1 = Lift(m);
  const Vec3 x2 = Lift(m_prime);
  const Vec3 line2 = f * x1;
  const Vec3 line1 =
      variant == SedVariant::kTransposed ? Vec3(f.transpose() * x2) : Vec3(f * x2);
  if (IsDegenerate(line2.x(), line2.y()) || IsDegenerate(line1.x(), line1.y())) {
    throw Error(ErrorCode::kDegenerateLine,
                "epipolar line has zero gradient (point at the epipole)");
  }
  const double residual = BilinearForm(f, x1, x2);
  const double g2 = line2.x() * line2.x() + line2.y() * line2.y();
  const double g1 = line1.x() * line1.x() + line1.y() * line1.y();
  return (1.0 / g2 + 1.0 / g1) * residual * residual;
}

double SymmetricEpipolarDistance(const FundamentalMatrix& f, const Vec2& m,
                                 const Vec2& m_prime, SedVariant variant) {
  return SymmetricEpipolarDistance(f.matrix(), m, m_prime, variant);
}

double PointLineDistance(const EpipolarLine& line, const Vec2& p) {
  return std::abs(line.a * p.x() + line.b * p.y() + line.c) /
         std::hypot(line.a, line.b);
}

double SedObjective(const FundamentalMatrix& f, const CorrespondenceSet& set) {
  double total = 0.0;
  for (std::size_t i = 0; i < set.pairs.size(); ++i) {
    try {
      total += SymmetricEpipolarDistance(f, set.pairs[i].m,
                                         set.pairs[i].m_prime);
    } catch (const Error& e) {
      throw Error(e.code(), "pair " + std::to_string(i) + ": " + e.what(), i);
    }
  }
  return total;
}

}  // namespace epipolar
