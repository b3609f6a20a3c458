#pragma once

#include <optional>
#include <string_view>

#include "pmsm/frames.hpp"
#include "pmsm/plant.hpp"

namespace pmsm {

/// Speed-loop PI with optional active damping:
///   i_q* = (K_pw + K_iw/s)(w* - w) - xi_a * w
struct SpeedLoopDesign {
  double beta = 0.0;  // rad/s, closed-loop bandwidth
  double xi_a = 0.0;  // A s / rad
  double K_pw = 0.0;  // A s / rad
  double K_iw = 0.0;  // A / rad
};

enum class Decoupling { none, feedforward };

/// Sign convention of the q-axis feed-forward term. `printed` subtracts
/// w_e (Ld i_d + psi_f) from u_q*, `cancelling` adds it so that the term
/// cancels the plant's back-EMF. The d-axis term is -w_e Lq i_q in both.
enum class DecouplingSign { printed, cancelling };

struct CurrentLoopDesign {
  double a = 0.0;     // rad/s
  double K_pd = 0.0;  // V / A
  double K_id = 0.0;  // V / (A s)
  double K_pq = 0.0;
  double K_iq = 0.0;
  Decoupling decoupling = Decoupling::none;
  DecouplingSign decoupling_sign = DecouplingSign::printed;
};

/// Integrator of a discrete PI regulator and its output clamp.
struct PiState {
  double integral = 0.0;
  double lower = -1e300;
  double upper = 1e300;
  bool saturated = false;

  static PiState symmetric(double limit) { return {0.0, -limit, limit, false}; }
};

SpeedLoopDesign design_speed_loop(const MotorParams& p, double beta,
                                  bool use_active_damping);

/// Current-loop bandwidth used when none is given: 2*pi*R/Ld.
double default_current_bandwidth(const MotorParams& p);

/// Internal-model-control gains K_p = a L, K_i = a R per axis.
CurrentLoopDesign design_current_loop(const MotorParams& p,
                                      std::optional<double> a,
                                      Decoupling decoupling);

/// One forward-Euler PI update with clamping anti-windup: the integral is
/// held whenever the unclamped output (including `feedforward`) falls
/// outside [lower, upper].
double pi_update(double error, double kp, double ki, double feedforward,
                 PiState& s, double dt);

/// Speed regulator; returns the clamped q-axis current reference.
double speed_step(double ref_omega_m, double meas_omega_m,
                  const SpeedLoopDesign& d, PiState& s, double dt);

/// Cross-coupling feed-forward added to the current-regulator outputs.
DqPair decoupling_feedforward(const DqPair& meas, double omega_e,
                              const MotorParams& p, DecouplingSign sign);

/// Current regulators; returns the rotor-frame voltage command. Limits on
/// `s_d`/`s_q` bound each axis.
DqPair current_step(const DqPair& ref, const DqPair& meas, double omega_e,
                    const CurrentLoopDesign& d, PiState& s_d, PiState& s_q,
                    const MotorParams& p, double dt);

/// Ideal inverter: each axis independently clamped to [-u_max, u_max].
DqPair limit_voltage(const DqPair& u, double u_max);

std::string_view to_string(Decoupling d);
std::string_view to_string(DecouplingSign s);

}  // namespace pmsm
