#include "pmsm/frames.hpp"

#include <cmath>
#include <numbers>

namespace pmsm {

namespace {
constexpr double kSqrt3 = std::numbers::sqrt3;
}

double wrap_angle(double theta) {
  constexpr double pi = std::numbers::pi;
  if (theta >= -pi && theta < pi) {
    return theta;
  }
  double wrapped = std::fmod(theta + pi, kTwoPi);
  if (wrapped < 0.0) {
    wrapped += kTwoPi;
  }
  wrapped -= pi;
  // fmod can round up to exactly +pi for inputs a hair below an odd multiple.
  return wrapped >= pi ? -pi : wrapped;
}

AlphaBeta clarke(const AbcTriple& abc) {
  return {(2.0 * abc.a - abc.b - abc.c) / 3.0, (abc.b - abc.c) / kSqrt3};
}

AbcTriple inverse_clarke(const AlphaBeta& ab) {
  const double half_sqrt3_beta = 0.5 * kSqrt3 * ab.beta;
  return {ab.alpha, -0.5 * ab.alpha + half_sqrt3_beta,
          -0.5 * ab.alpha - half_sqrt3_beta};
}

DqPair park(const AlphaBeta& ab, double theta_e) {
  const double c = std::cos(theta_e);
  const double s = std::sin(theta_e);
  return {ab.alpha * c + ab.beta * s, -ab.alpha * s + ab.beta * c};
}

AlphaBeta inverse_park(const DqPair& dq, double theta_e) {
  const double c = std::cos(theta_e);
  const double s = std::sin(theta_e);
  return {dq.d * c - dq.q * s, dq.d * s + dq.q * c};
}

}  // namespace pmsm
