#pragma once

#include "pmsm/frames.hpp"

namespace pmsm {

/// Per-phase motor constants. Resistance and inductances are phase values
/// (half of a line-to-line measurement for a star-connected winding).
struct MotorParams {
  double R = 0.0;      // ohm
  double Ld = 0.0;     // H
  double Lq = 0.0;     // H
  double psi_f = 0.0;  // Wb
  double J = 0.0;      // kg m^2
  double xi = 0.0;     // N m s / rad
  int pn = 1;          // pole pairs
  double u_max = 0.0;  // V, per-axis inverter clamp

  /// Throws InvariantError when a physical constant is out of range.
  void validate() const;

  /// 1.5 * pn * psi_f, the surface-mount torque constant in N m / A.
  double torque_constant() const { return 1.5 * pn * psi_f; }

  bool operator==(const MotorParams&) const = default;
};

struct PlantState {
  double i_d = 0.0;
  double i_q = 0.0;
  double omega_m = 0.0;  // rad/s, mechanical
  double theta_e = 0.0;  // rad, electrical, [-pi, pi)

  double omega_e(const MotorParams& p) const { return p.pn * omega_m; }

  bool operator==(const PlantState&) const = default;
};

struct LoadInput {
  double T_L = 0.0;  // N m
};

struct CurrentDerivatives {
  double di_d = 0.0;
  double di_q = 0.0;
};

/// dq stator-current dynamics of the machine driven by rotor-frame voltage `u`.
CurrentDerivatives electrical_derivatives(const PlantState& state,
                                          const DqPair& u,
                                          const MotorParams& p);

/// Electromagnetic torque including the reluctance term.
double torque(const PlantState& state, const MotorParams& p);

/// d(omega_m)/dt from the rotor torque balance. The angle obeys
/// d(theta_e)/dt = pn * omega_m; see `angle_derivative`.
double mechanical_derivative(const PlantState& state, double Te,
                             const LoadInput& load, const MotorParams& p);

inline double angle_derivative(const PlantState& state, const MotorParams& p) {
  return state.omega_e(p);
}

/// Ground-truth stationary-frame back-EMF of a surface-mount machine.
/// Throws std::invalid_argument when Ld != Lq.
AlphaBeta backemf_alphabeta(const PlantState& state, const MotorParams& p);

}  // namespace pmsm
