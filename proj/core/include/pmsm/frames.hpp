#pragma once

#include <cmath>
#include <numbers>

namespace pmsm {

// Amplitude-invariant (2/3 scaled) reference-frame transforms.

struct AbcTriple {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

struct AlphaBeta {
  double alpha = 0.0;
  double beta = 0.0;
};

struct DqPair {
  double d = 0.0;
  double q = 0.0;
};

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle to [-pi, pi).
double wrap_angle(double theta);

AlphaBeta clarke(const AbcTriple& abc);
AbcTriple inverse_clarke(const AlphaBeta& ab);

/// Rotates a stationary-frame vector into the frame at electrical angle
/// `theta_e`.
DqPair park(const AlphaBeta& ab, double theta_e);
AlphaBeta inverse_park(const DqPair& dq, double theta_e);

inline double norm(const AlphaBeta& v) { return std::hypot(v.alpha, v.beta); }
inline double norm(const DqPair& v) { return std::hypot(v.d, v.q); }

}  // namespace pmsm
