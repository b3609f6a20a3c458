#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "pmsm/frames.hpp"

namespace pmsm {
namespace {

constexpr double kTol = 1e-12;
const double kHalfSqrt3 = std::sqrt(3.0) / 2.0;

TEST(Clarke, BalancedSetAlignedWithPhaseA) {
  const AlphaBeta ab = clarke({1.0, -0.5, -0.5});
  EXPECT_NEAR(ab.alpha, 1.0, kTol);
  EXPECT_NEAR(ab.beta, 0.0, kTol);
}

TEST(Clarke, ZeroInput) {
  const AlphaBeta ab = clarke({0.0, 0.0, 0.0});
  EXPECT_EQ(ab.alpha, 0.0);
  EXPECT_EQ(ab.beta, 0.0);
}

TEST(Clarke, QuadratureSet) {
  // alpha = 2/3 (a - b/2 - c/2), beta = (b - c) / sqrt(3)
  const AbcTriple abc{0.0, kHalfSqrt3, -kHalfSqrt3};
  const double alpha = 2.0 / 3.0 * (abc.a - 0.5 * abc.b - 0.5 * abc.c);
  const double beta = (abc.b - abc.c) / std::sqrt(3.0);
  const AlphaBeta ab = clarke(abc);
  EXPECT_NEAR(ab.alpha, alpha, kTol);
  EXPECT_NEAR(ab.beta, beta, kTol);
  EXPECT_NEAR(ab.beta, 1.0, kTol);
}

TEST(InverseClarke, Examples) {
  AbcTriple abc = inverse_clarke({1.0, 0.0});
  EXPECT_NEAR(abc.a, 1.0, kTol);
  EXPECT_NEAR(abc.b, -0.5, kTol);
  EXPECT_NEAR(abc.c, -0.5, kTol);

  abc = inverse_clarke({0.0, 0.0});
  EXPECT_EQ(abc.a, 0.0);
  EXPECT_EQ(abc.b, 0.0);
  EXPECT_EQ(abc.c, 0.0);

  abc = inverse_clarke({0.0, 1.0});
  EXPECT_NEAR(abc.a, 0.0, kTol);
  EXPECT_NEAR(abc.b, kHalfSqrt3, kTol);
  EXPECT_NEAR(abc.c, -kHalfSqrt3, kTol);
}

TEST(Park, Examples) {
  DqPair dq = park({1.0, 0.0}, 0.0);
  EXPECT_NEAR(dq.d, 1.0, kTol);
  EXPECT_NEAR(dq.q, 0.0, kTol);

  dq = park({1.0, 0.0}, std::numbers::pi / 2);
  EXPECT_NEAR(dq.d, 0.0, kTol);
  EXPECT_NEAR(dq.q, -1.0, kTol);

  for (double theta : {-3.0, -1.0, 0.3, 2.9}) {
    dq = park({0.0, 0.0}, theta);
    EXPECT_EQ(dq.d, 0.0);
    EXPECT_EQ(dq.q, 0.0);
  }
}

TEST(InversePark, Examples) {
  AlphaBeta ab = inverse_park({1.0, 0.0}, 0.0);
  EXPECT_NEAR(ab.alpha, 1.0, kTol);
  EXPECT_NEAR(ab.beta, 0.0, kTol);

  ab = inverse_park({0.0, 1.0}, std::numbers::pi / 2);
  EXPECT_NEAR(ab.alpha, -1.0, kTol);
  EXPECT_NEAR(ab.beta, 0.0, kTol);
}

TEST(Transforms, RandomRoundTripsAndNorms) {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> value(-10.0, 10.0);
  std::uniform_real_distribution<double> angle(-20.0, 20.0);
  for (int i = 0; i < 10000; ++i) {
    const DqPair x{value(rng), value(rng)};
    const double theta = angle(rng);

    const DqPair back = park(inverse_park(x, theta), theta);
    EXPECT_NEAR(back.d, x.d, kTol);
    EXPECT_NEAR(back.q, x.q, kTol);
    EXPECT_NEAR(norm(inverse_park(x, theta)), norm(x), kTol);

    const AlphaBeta ab{x.d, x.q};
    EXPECT_NEAR(norm(park(ab, theta)), norm(ab), kTol);

    const AlphaBeta ab_back = clarke(inverse_clarke(ab));
    EXPECT_NEAR(ab_back.alpha, ab.alpha, kTol);
    EXPECT_NEAR(ab_back.beta, ab.beta, kTol);

    // Balanced triples (zero sequence) survive the opposite round trip.
    const double a = value(rng);
    const double b = value(rng);
    const AbcTriple abc{a, b, -a - b};
    const AbcTriple abc_back = inverse_clarke(clarke(abc));
    EXPECT_NEAR(abc_back.a, abc.a, kTol);
    EXPECT_NEAR(abc_back.b, abc.b, kTol);
    EXPECT_NEAR(abc_back.c, abc.c, kTol);
  }
}

TEST(WrapAngle, RangeAndEquivalence) {
  EXPECT_DOUBLE_EQ(wrap_angle(0.0), 0.0);
  EXPECT_DOUBLE_EQ(wrap_angle(std::numbers::pi), -std::numbers::pi);
  EXPECT_DOUBLE_EQ(wrap_angle(-std::numbers::pi), -std::numbers::pi);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(-1000.0, 1000.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = angle(rng);
    const double w = wrap_angle(x);
    EXPECT_GE(w, -std::numbers::pi);
    EXPECT_LT(w, std::numbers::pi);
    EXPECT_NEAR(std::sin(w), std::sin(x), 1e-9);
    EXPECT_NEAR(std::cos(w), std::cos(x), 1e-9);
  }
}

}  // namespace
}  // namespace pmsm
