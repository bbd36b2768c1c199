#include <cmath>
#include <functional>
#include <cstring>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "epipolar/epipolar.h"
#include "epipolar/error.h"
#include "epipolar/fundamental_matrix.h"
#include "epipolar/random.h"
#include "epipolar/synthetic.h"
#include "test_util.h"

namespace epipolar {
namespace {

using testing::MakeScene;
using testing::SatisfiesFInvariants;
using testing::ToArray;

Mat3 MatrixFromRows(std::initializer_list<double> values) {
  Mat3 m;
  int i = 0;
  for (const double v : values) {
    m(i / 3, i % 3) = v;
    ++i;
  }
  return m;
}

const Mat3 kXTranslation = MatrixFromRows({0, 0, 0, 0, 0, -1, 0, 1, 0});

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an epipolar::Error";
  return ErrorCode::kIoError;
}

TEST(FundamentalFromCameras, IdentityCamerasXTranslation) {
  RelativePose pose;
  pose.translation = Vec3(1, 0, 0);
  const FundamentalMatrix f = FundamentalFromCameras({}, {}, pose);
  // First max-abs entry in row-major order is (1,2) = -1, so the sign flips.
  EXPECT_EQ(f.matrix(), MatrixFromRows({0, 0, 0, 0, 0, 1, 0, -1, 0}));
  EXPECT_EQ(NormalizeF(kXTranslation), f);
}

TEST(FundamentalFromCameras, IdentityCamerasZTranslation) {
  RelativePose pose;
  pose.translation = Vec3(0, 0, 1);
  const FundamentalMatrix f = FundamentalFromCameras({}, {}, pose);
  EXPECT_EQ(f.matrix(), MatrixFromRows({0, 1, 0, -1, 0, 0, 0, 0, 0}));
  EXPECT_EQ(f, NormalizeF(MatrixFromRows({0, -1, 0, 1, 0, 0, 0, 0, 0})));
}

TEST(FundamentalFromCameras, KittiRigProjectedPoints) {
  CameraRig rig;
  rig.k1 = {720, 720, 620, 187, 0};
  rig.k2 = rig.k1;
  rig.pose.translation = Vec3(0.54, 0, 0);
  const FundamentalMatrix f = FundamentalFromRig(rig);
  EXPECT_TRUE(SatisfiesFInvariants(f));

  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> xy(-10, 10), depth(4, 60);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec3 x1(xy(gen), xy(gen) * 0.3, depth(gen));
    const Vec3 x2 = rig.pose.rotation * x1 + rig.pose.translation;
    const Vec2 m = (rig.k1.Matrix() * x1).hnormalized();
    const Vec2 mp = (rig.k2.Matrix() * x2).hnormalized();
    worst = std::max(worst,
                     std::abs(oracle::Residual(ToArray(f.matrix()),
                                               {m.x(), m.y(), mp.x(), mp.y()})));
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(FundamentalFromCameras, Errors) {
  RelativePose pose;
  pose.translation = Vec3(0, 0, 1e-13);
  EXPECT_EQ(CodeOf([&] { FundamentalFromCameras({}, {}, pose); }),
            ErrorCode::kZeroTranslation);
  pose.translation = Vec3(1, 0, 0);
  CameraIntrinsics singular;
  singular.fx = 0.0;
  EXPECT_EQ(CodeOf([&] { FundamentalFromCameras(singular, {}, pose); }),
            ErrorCode::kSingularIntrinsics);
  pose.rotation = Vec3(1, 1, -1).asDiagonal();
  EXPECT_EQ(CodeOf([&] { FundamentalFromCameras({}, {}, pose); }),
            ErrorCode::kInvalidRotation);
}

TEST(EpipolarLine, Examples) {
  const EpipolarLine l = ComputeEpipolarLine(kXTranslation, Vec2(3, 4));
  EXPECT_EQ(l.a, 0.0);
  EXPECT_EQ(l.b, -1.0);
  EXPECT_EQ(l.c, 4.0);

  const Mat3 z = MatrixFromRows({0, -1, 0, 1, 0, 0, 0, 0, 0});
  const EpipolarLine l2 = ComputeEpipolarLine(z, Vec2(1, 0));
  EXPECT_EQ(l2.a, 0.0);
  EXPECT_EQ(l2.b, 1.0);
  EXPECT_EQ(l2.c, 0.0);

  // Canonical representative gives the same line up to scale.
  const EpipolarLine lc =
      ComputeEpipolarLine(NormalizeF(kXTranslation), Vec2(3, 4));
  EXPECT_EQ(lc.b, 1.0);
  EXPECT_EQ(lc.c, -4.0);
}

TEST(EpipolarLine, EpipoleIsDegenerate) {
  // Right null vector of the z-translation F is (0, 0, 1): the image origin.
  const FundamentalMatrix f =
      NormalizeF(MatrixFromRows({0, -1, 0, 1, 0, 0, 0, 0, 0}));
  EXPECT_EQ(CodeOf([&] { ComputeEpipolarLine(f, Vec2(0, 0)); }),
            ErrorCode::kDegenerateLine);
  // Pure x-translation: the epipole is at infinity, so use a finite-epipole
  // rig to hit it through the canonical type as well.
  RelativePose pose;
  pose.translation = Vec3(0.2, 0.1, 1.0);
  const FundamentalMatrix g = FundamentalFromCameras({}, {}, pose);
  EXPECT_EQ(CodeOf([&] { ComputeEpipolarLine(g, Vec2(0.2, 0.1)); }),
            ErrorCode::kDegenerateLine);
}

TEST(EpipolarResidual, Examples) {
  const FundamentalMatrix f = NormalizeF(kXTranslation);
  EXPECT_EQ(EpipolarResidual(f, Vec2(3, 4), Vec2(9, 4)), 0.0);
  EXPECT_EQ(EpipolarResidual(f, Vec2(3, 4), Vec2(9, 6)), 2.0);
}

TEST(EpipolarResidual, RandomRigsProjectedPoints) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Scene scene = MakeScene(seed, 0.0, 0.0);
    for (const auto& p : scene.set.pairs) {
      ASSERT_LE(std::abs(EpipolarResidual(scene.f_gt, p.m, p.m_prime)), 1e-9);
    }
  }
}

TEST(SymmetricEpipolarDistance, HandOracle) {
  const FundamentalMatrix f = NormalizeF(kXTranslation);
  EXPECT_EQ(SymmetricEpipolarDistance(f, Vec2(3, 4), Vec2(9, 6)), 8.0);
}

TEST(SymmetricEpipolarDistance, PerfectCorrespondenceIsZero) {
  const Scene scene = MakeScene(3, 0.0, 0.0);
  for (const auto& p : scene.set.pairs) {
    EXPECT_LE(SymmetricEpipolarDistance(scene.f_gt, p.m, p.m_prime), 1e-14);
  }
}

TEST(SymmetricEpipolarDistance, MatchesBruteForce) {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const Scene scene = MakeScene(100 + i % 5, 0.0, 0.0);
    const auto& p = scene.set.pairs[i % scene.set.size()];
    const Vec2 mp = p.m_prime + Vec2(rng.Normal(0, 2), rng.Normal(0, 2));
    const double got = SymmetricEpipolarDistance(scene.f_gt, p.m, mp);
    const double want = oracle::Sed(ToArray(scene.f_gt.matrix()),
                                    {p.m.x(), p.m.y(), mp.x(), mp.y()});
    EXPECT_TRUE(oracle::Close(got, want, 1e-12)) << got << " vs " << want;
  }
}

TEST(SymmetricEpipolarDistance, SwapSymmetry) {
  Rng rng(5);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Scene scene = MakeScene(seed, 1.0, 0.2);
    const Mat3 ft = scene.f_gt.matrix().transpose();
    for (const auto& p : scene.set.pairs) {
      const double a = SymmetricEpipolarDistance(scene.f_gt, p.m, p.m_prime);
      const double b = SymmetricEpipolarDistance(ft, p.m_prime, p.m);
      ASSERT_TRUE(oracle::Close(a, b, 1e-12)) << a << " vs " << b;
    }
  }
}

TEST(SymmetricEpipolarDistance, LiteralVariantUsesFTimesMPrime) {
  const Mat3 f = MatrixFromRows({0.1, 0.2, 0.3, -0.4, 0.5, 1.0, 0.7, -0.8, 0.2});
  const Vec2 m(3, 4), mp(5, -2);
  const Vec3 l2 = f * Lift(m);
  const Vec3 l1 = f * Lift(mp);
  const double r = Lift(mp).dot(l2);
  const double want = (1.0 / l2.head<2>().squaredNorm() +
                       1.0 / l1.head<2>().squaredNorm()) *
                      r * r;
  EXPECT_TRUE(oracle::Close(
      SymmetricEpipolarDistance(f, m, mp, SedVariant::kLiteral), want, 1e-12));
  EXPECT_FALSE(oracle::Close(SymmetricEpipolarDistance(f, m, mp), want, 1e-3));
}

TEST(SymmetricEpipolarDistance, DegenerateLine) {
  RelativePose pose;
  pose.translation = Vec3(0.2, 0.1, 1.0);
  const FundamentalMatrix f = FundamentalFromCameras({}, {}, pose);
  EXPECT_EQ(CodeOf([&] {
              SymmetricEpipolarDistance(f, Vec2(0.2, 0.1), Vec2(3, 3));
            }),
            ErrorCode::kDegenerateLine);
}

TEST(Incidence, NoiseFreePointsLieOnTheirLines) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Scene scene = MakeScene(seed, 0.0, 0.0);
    for (const auto& p : scene.set.pairs) {
      const EpipolarLine l = ComputeEpipolarLine(scene.f_gt, p.m);
      ASSERT_LE(PointLineDistance(l, p.m_prime), 1e-7);
    }
  }
}

TEST(NormalizeF, Examples) {
  const FundamentalMatrix f =
      NormalizeF(MatrixFromRows({0, 0, 0, 0, 0, 2, 0, -2, 0}));
  EXPECT_EQ(f.matrix(), MatrixFromRows({0, 0, 0, 0, 0, 1, 0, -1, 0}));
  EXPECT_EQ(NormalizeF(f.matrix()), f);
  EXPECT_EQ(NormalizeF(-3.0 * f.matrix()), f);
}

TEST(NormalizeF, Errors) {
  EXPECT_EQ(CodeOf([] { NormalizeF(Mat3::Zero()); }), ErrorCode::kZeroMatrix);
  EXPECT_EQ(CodeOf([] { NormalizeF(Mat3::Constant(1e-16)); }),
            ErrorCode::kZeroMatrix);
  EXPECT_EQ(CodeOf([] { NormalizeF(Mat3::Identity()); }),
            ErrorCode::kNotRankTwo);
}

TEST(NormalizeF, ScaleInvarianceProperty) {
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    Mat3 m;
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = rng.Uniform(-5, 5);
    const FundamentalMatrix base = EnforceRank2(m);
    ASSERT_TRUE(SatisfiesFInvariants(base));
    // Power-of-two scales are exact in floating point: bit-for-bit equality.
    const double exponent = std::floor(rng.Uniform(-30, 30));
    const double sign = rng.Uniform() < 0.5 ? -1.0 : 1.0;
    const FundamentalMatrix scaled =
        NormalizeF(sign * std::ldexp(1.0, static_cast<int>(exponent)) *
                   base.matrix());
    ASSERT_EQ(std::memcmp(scaled.matrix().data(), base.matrix().data(),
                          sizeof(double) * 9),
              0);
    // Arbitrary scales agree to the last couple of ulps.
    const double s = sign * rng.Uniform(0.01, 100.0);
    const FundamentalMatrix general = NormalizeF(s * base.matrix());
    ASSERT_LE((general.matrix() - base.matrix()).cwiseAbs().maxCoeff(),
              4 * std::numeric_limits<double>::epsilon());
  }
}

TEST(NormalizeF, TieBreakUsesFirstRowMajorEntry) {
  const FundamentalMatrix f =
      NormalizeF(MatrixFromRows({0, -3, 0, 3, 0, 0, 0, 0, 0}));
  EXPECT_EQ(f(0, 1), 1.0);
  EXPECT_EQ(f(1, 0), -1.0);
}

TEST(NormalizeF, RoundingNearATieDoesNotFlipTheSign) {
  // The second entry exceeds the first by a few ulps only.
  const double near_one = 1.0 - 4e-16;
  const FundamentalMatrix f =
      NormalizeF(MatrixFromRows({0, near_one, 0, -1, 0, 0, 0, 0, 0}));
  EXPECT_GT(f(0, 1), 0.0);
  EXPECT_EQ(f(1, 0), -1.0);
  EXPECT_TRUE(IsCanonical(f.matrix()));
  // Outside the tie band the larger entry governs as usual.
  const FundamentalMatrix g =
      NormalizeF(MatrixFromRows({0, 0.999, 0, -1, 0, 0, 0, 0, 0}));
  EXPECT_EQ(g(1, 0), 1.0);
  EXPECT_EQ(g(0, 1), -0.999);
}

TEST(ReconstructRank2, Examples) {
  const FundamentalMatrix a = ReconstructRank2({Vec3(1, 0, 0), Vec3(0, 1, 0), 0, 0});
  EXPECT_EQ(a.matrix(), MatrixFromRows({1, 0, 0, 0, 1, 0, 0, 0, 0}));

  const FundamentalMatrix b =
      ReconstructRank2({Vec3(0, 0, 0.5), Vec3(0, -0.5, 0), 2.0, 0.0});
  EXPECT_EQ(Vec3(b.matrix().col(2)), Vec3(2.0 * b.matrix().col(0)));
  EXPECT_EQ(b.matrix(), MatrixFromRows({0, 0, 0, 0, -0.5, 0, 0.5, 0, 1}));
  EXPECT_LE(RankRatio(b.matrix()), 1e-15);
}

TEST(ReconstructRank2, DependentColumns) {
  EXPECT_EQ(CodeOf([] {
              ReconstructRank2({Vec3(1, 2, 3), Vec3(2, 4, 6), 1, 1});
            }),
            ErrorCode::kDependentColumns);
  EXPECT_EQ(CodeOf([] { ReconstructRank2({Vec3::Zero(), Vec3(0, 1, 0), 1, 1}); }),
            ErrorCode::kDependentColumns);
}

TEST(ReconstructRank2, RoundTripThroughSyntheticRigs) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const FundamentalMatrix f = FundamentalFromRig(RandomRig(seed));
    const RankTwoParams params = DecomposeRank2(f);
    const FundamentalMatrix back = ReconstructRank2(params);
    ASSERT_LE((back.matrix() - f.matrix()).norm(), 1e-10) << "seed " << seed;

    const RankTwoParams again = DecomposeRank2(back);
    ASSERT_LE((again.f1 - params.f1).norm(), 1e-10);
    ASSERT_LE((again.f2 - params.f2).norm(), 1e-10);
    ASSERT_NEAR(again.alpha, params.alpha, 1e-10 * (1 + std::abs(params.alpha)));
    ASSERT_NEAR(again.beta, params.beta, 1e-10 * (1 + std::abs(params.beta)));
  }
}

TEST(EnforceRank2, Identity) {
  const FundamentalMatrix f = EnforceRank2(Mat3::Identity());
  EXPECT_TRUE(SatisfiesFInvariants(f));
  EXPECT_LE(RankRatio(f.matrix()), 1e-12);
  // Any rank-2 truncation of I is a projector with two unit singular values.
  const Eigen::JacobiSVD<Mat3> svd(f.matrix());
  EXPECT_NEAR(svd.singularValues()(0), 1.0, 1e-12);
  EXPECT_NEAR(svd.singularValues()(1), 1.0, 1e-12);
}

TEST(EnforceRank2, FixedPointOnRankTwo) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FundamentalMatrix f = FundamentalFromRig(RandomRig(seed));
    EXPECT_LE((EnforceRank2(f.matrix()).matrix() - f.matrix()).norm(), 1e-12);
  }
}

TEST(EnforceRank2, NearestAgainstSampledRankTwoMatrices) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Mat3 m;
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = rng.Uniform(-1, 1);
    const FundamentalMatrix f = EnforceRank2(m);
    ASSERT_LE(RankRatio(f.matrix()), 1e-12);
    // Compare at the scale of the input: undo the canonical scaling by the
    // optimal scalar projection.
    const double scale = m.cwiseProduct(f.matrix()).sum() / f.matrix().squaredNorm();
    const double ours = (m - scale * f.matrix()).norm();
    const Mat3 nearest = scale * f.matrix();
    for (int s = 0; s < 200; ++s) {
      Mat3 e;
      for (int i = 0; i < 9; ++i) e(i / 3, i % 3) = rng.Uniform(-1, 1);
      Eigen::Matrix<double, 3, 2> u, v;
      for (int i = 0; i < 6; ++i) {
        u(i % 3, i / 3) = rng.Uniform(-1, 1);
        v(i % 3, i / 3) = rng.Uniform(-1, 1);
      }
      // Products with a rank-2 factor stay rank <= 2.
      Mat3 sample;
      switch (s % 3) {
        case 0: sample = u * v.transpose(); break;
        case 1: sample = nearest * (Mat3::Identity() + 0.05 * e); break;
        default: sample = (Mat3::Identity() + 0.05 * e) * nearest; break;
      }
      ASSERT_LE(ours, (m - sample).norm() + 1e-12);
    }
  }
}

TEST(Serialization, RoundTripIsExact) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const FundamentalMatrix f = FundamentalFromRig(RandomRig(seed));
    EXPECT_EQ(ParseF(FormatF(f)), f);
  }
  const FundamentalMatrix g = NormalizeF(kXTranslation);
  EXPECT_EQ(FormatF(g), "0 0 0\n0 0 1\n0 -1 0\n");
}

TEST(Serialization, ParseAcceptsArbitraryWhitespaceAndComments) {
  const FundamentalMatrix f =
      ParseF("# header\n  0\t0 0 0\n\n 0 1   0 -1\n0 # trailing\n");
  EXPECT_EQ(f, NormalizeF(kXTranslation));
}

TEST(Serialization, ParseRejectsWrongCount) {
  EXPECT_EQ(CodeOf([] { ParseF("0 0 0 0 0 1 0 -1"); }), ErrorCode::kParseError);
  EXPECT_EQ(CodeOf([] { ParseF("0 0 0 0 0 1 0 -1 0 5"); }),
            ErrorCode::kParseError);
  EXPECT_EQ(CodeOf([] { ParseF("0 0 0 0 zero 1 0 -1 0"); }),
            ErrorCode::kParseError);
}

}  // namespace
}  // namespace epipolar
