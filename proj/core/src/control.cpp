#include "pmsm/control.hpp"

#include <algorithm>
#include <cmath>

#include "pmsm/errors.hpp"

namespace pmsm {

SpeedLoopDesign design_speed_loop(const MotorParams& p, double beta,
                                  bool use_active_damping) {
  if (!(beta > 0.0)) {
    throw InvariantError("speed-loop bandwidth beta must be > 0");
  }
  const double kt = p.torque_constant();
  SpeedLoopDesign d;
  d.beta = beta;
  d.K_pw = p.J * beta / kt;
  d.K_iw = beta * d.K_pw;
  d.xi_a = use_active_damping ? (p.J * beta - p.xi) / kt : 0.0;
  return d;
}

double default_current_bandwidth(const MotorParams& p) {
  return kTwoPi * p.R / p.Ld;
}

CurrentLoopDesign design_current_loop(const MotorParams& p,
                                      std::optional<double> a,
                                      Decoupling decoupling) {
  const double bandwidth = a.value_or(default_current_bandwidth(p));
  if (!(bandwidth > 0.0)) {
    throw InvariantError("current-loop parameter a must be > 0");
  }
  CurrentLoopDesign d;
  d.a = bandwidth;
  d.K_pd = bandwidth * p.Ld;
  d.K_id = bandwidth * p.R;
  d.K_pq = bandwidth * p.Lq;
  d.K_iq = bandwidth * p.R;
  d.decoupling = decoupling;
  return d;
}

double pi_update(double error, double kp, double ki, double feedforward,
                 PiState& s, double dt) {
  const double raw = kp * error + s.integral + feedforward;
  const double out = std::clamp(raw, s.lower, s.upper);
  s.saturated = out != raw;
  if (!s.saturated) {
    s.integral += ki * error * dt;
  }
  return out;
}

double speed_step(double ref_omega_m, double meas_omega_m,
                  const SpeedLoopDesign& d, PiState& s, double dt) {
  return pi_update(ref_omega_m - meas_omega_m, d.K_pw, d.K_iw,
                   -d.xi_a * meas_omega_m, s, dt);
}

DqPair decoupling_feedforward(const DqPair& meas, double omega_e,
                              const MotorParams& p, DecouplingSign sign) {
  const double q_term = omega_e * (p.Ld * meas.d + p.psi_f);
  return {-omega_e * p.Lq * meas.q,
          sign == DecouplingSign::printed ? -q_term : q_term};
}

DqPair current_step(const DqPair& ref, const DqPair& meas, double omega_e,
                    const CurrentLoopDesign& d, PiState& s_d, PiState& s_q,
                    const MotorParams& p, double dt) {
  DqPair ff;
  if (d.decoupling == Decoupling::feedforward) {
    ff = decoupling_feedforward(meas, omega_e, p, d.decoupling_sign);
  }
  return {pi_update(ref.d - meas.d, d.K_pd, d.K_id, ff.d, s_d, dt),
          pi_update(ref.q - meas.q, d.K_pq, d.K_iq, ff.q, s_q, dt)};
}

DqPair limit_voltage(const DqPair& u, double u_max) {
  return {std::clamp(u.d, -u_max, u_max), std::clamp(u.q, -u_max, u_max)};
}

std::string_view to_string(Decoupling d) {
  return d == Decoupling::feedforward ? "feedforward" : "none";
}

std::string_view to_string(DecouplingSign s) {
  return s == DecouplingSign::cancelling ? "cancelling" : "printed";
}

}  // namespace pmsm
