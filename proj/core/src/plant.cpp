#include "pmsm/plant.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "pmsm/errors.hpp"

namespace pmsm {

namespace {

void require(bool ok, const char* what) {
  if (!ok) {
    throw InvariantError(std::string("motor parameter out of range: ") + what);
  }
}

}  // namespace

void MotorParams::validate() const {
  require(std::isfinite(R) && R > 0.0, "R > 0");
  require(std::isfinite(Ld) && Ld > 0.0, "Ld > 0");
  require(std::isfinite(Lq) && Lq > 0.0, "Lq > 0");
  require(std::isfinite(psi_f) && psi_f > 0.0, "psi_f > 0");
  require(std::isfinite(J) && J > 0.0, "J > 0");
  require(std::isfinite(xi) && xi >= 0.0, "xi >= 0");
  require(pn >= 1, "pn >= 1");
  require(std::isfinite(u_max) && u_max > 0.0, "u_max > 0");
}

CurrentDerivatives electrical_derivatives(const PlantState& state,
                                          const DqPair& u,
                                          const MotorParams& p) {
  const double omega_e = state.omega_e(p);
  // The q row divides by Lq; identical to the Ld form when Ld == Lq.
  return {
      (-p.R * state.i_d + p.Lq * omega_e * state.i_q + u.d) / p.Ld,
      -(p.R * state.i_q + omega_e * (p.Ld * state.i_d + p.psi_f) - u.q) / p.Lq,
  };
}

double torque(const PlantState& state, const MotorParams& p) {
  return 1.5 * p.pn *
         (p.psi_f * state.i_q + (p.Ld - p.Lq) * state.i_d * state.i_q);
}

double mechanical_derivative(const PlantState& state, double Te,
                             const LoadInput& load, const MotorParams& p) {
  return (Te - load.T_L - p.xi * state.omega_m) / p.J;
}

AlphaBeta backemf_alphabeta(const PlantState& state, const MotorParams& p) {
  if (p.Ld != p.Lq) {
    throw std::invalid_argument(
        "backemf_alphabeta: ground-truth EMF requires Ld == Lq");
  }
  const double amplitude = state.omega_e(p) * p.psi_f;
  return {-amplitude * std::sin(state.theta_e),
          amplitude * std::cos(state.theta_e)};
}

}  // namespace pmsm
