#include "pmsm/observer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pmsm/errors.hpp"
#include "pmsm/integrator.hpp"

namespace pmsm {

namespace {

double switch_value(double error, const SmoParams& s) {
  if (s.switching == SwitchingFunction::saturation) {
    return std::clamp(error / s.boundary_width, -1.0, 1.0);
  }
  return static_cast<double>((error > 0.0) - (error < 0.0));
}

double emf_magnitude(const ObserverState& obs) {
  return std::hypot(obs.e_alpha_hat, obs.e_beta_hat);
}

}  // namespace

void SmoParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvariantError(std::string("observer parameter: ") + what);
  };
  require(std::isfinite(k) && k > 0.0, "k > 0");
  require(std::isfinite(tau0) && tau0 > 0.0, "tau0 > 0");
  require(std::isfinite(omega_c) && omega_c > 0.0, "omega_c > 0");
  require(std::isfinite(boundary_width) && boundary_width > 0.0,
          "boundary_width > 0");
  require(std::isfinite(emf_epsilon) && emf_epsilon >= 0.0,
          "emf_epsilon >= 0");
  require(direction_window > 0.0, "direction_window > 0");
  require(direction_emf_floor >= 0.0, "direction_emf_floor >= 0");
  require(direction_min_rotation >= 0.0, "direction_min_rotation >= 0");
}

AlphaBeta observer_derivatives(const ObserverState& obs, const AlphaBeta& u_ab,
                               const AlphaBeta& v_ab, double omega_e_hat,
                               const MotorParams& p) {
  const double saliency = (p.Ld - p.Lq) * omega_e_hat;
  return {
      (-p.R * obs.i_alpha_hat - saliency * obs.i_beta_hat + u_ab.alpha -
       v_ab.alpha) / p.Ld,
      (saliency * obs.i_alpha_hat - p.R * obs.i_beta_hat + u_ab.beta -
       v_ab.beta) / p.Ld,
  };
}

AlphaBeta sliding_control(const CurrentError& err, const SmoParams& s) {
  return {s.k * switch_value(err.e_ia, s), s.k * switch_value(err.e_ib, s)};
}

AlphaBeta filter_emf(const ObserverState& obs, const AlphaBeta& v_ab,
                     const SmoParams& s, double dt) {
  const double gain = dt / s.tau0;
  return {obs.e_alpha_hat + gain * (v_ab.alpha - obs.e_alpha_hat),
          obs.e_beta_hat + gain * (v_ab.beta - obs.e_beta_hat)};
}

double phase_compensation(double omega_e_hat, const SmoParams& s) {
  return std::atan(omega_e_hat / s.omega_c);
}

PositionEstimate extract_position(const ObserverState& obs,
                                  const SmoParams& s) {
  if (emf_magnitude(obs) < s.emf_epsilon) {
    return {obs.theta_hat, false};
  }
  double theta = std::atan2(-obs.e_alpha_hat, obs.e_beta_hat);
  if (obs.direction < 0) {
    // The EMF vector points opposite to the rotor's q axis when reversing.
    theta += std::numbers::pi;
  }
  theta += phase_compensation(obs.omega_e_hat, s);
  return {wrap_angle(theta), true};
}

double extract_speed(const ObserverState& obs, const MotorParams& p) {
  return obs.direction * emf_magnitude(obs) / p.psi_f;
}

SlidingModeObserver::SlidingModeObserver(const MotorParams& motor,
                                         const SmoParams& params)
    : motor_(motor), params_(params) {
  params_.validate();
}

void SlidingModeObserver::update(const AlphaBeta& i_meas, const AlphaBeta& u_ab,
                                 double dt) {
  last_error_ = {state_.i_alpha_hat - i_meas.alpha,
                 state_.i_beta_hat - i_meas.beta};
  const AlphaBeta v = sliding_control(last_error_, params_);

  const double omega_prev = state_.omega_e_hat;
  const auto next = rk3_step<2>(
      {state_.i_alpha_hat, state_.i_beta_hat},
      [&](const StateVector<2>& y) {
        ObserverState stage = state_;
        stage.i_alpha_hat = y[0];
        stage.i_beta_hat = y[1];
        const AlphaBeta d = observer_derivatives(stage, u_ab, v, omega_prev,
                                                 motor_);
        return StateVector<2>{d.alpha, d.beta};
      },
      dt);

  const AlphaBeta emf = filter_emf(state_, v, params_, dt);
  state_.i_alpha_hat = next[0];
  state_.i_beta_hat = next[1];
  state_.e_alpha_hat = emf.alpha;
  state_.e_beta_hat = emf.beta;

  track_direction(dt);
  state_.omega_e_hat = extract_speed(state_, motor_);
  const PositionEstimate pos = extract_position(state_, params_);
  state_.theta_hat = pos.theta;
  state_.position_valid = pos.valid;
}

void SlidingModeObserver::track_direction(double dt) {
  const double magnitude = emf_magnitude(state_);
  if (magnitude < params_.emf_epsilon) {
    have_emf_angle_ = false;
    window_above_floor_ = false;
  } else {
    const double angle = std::atan2(-state_.e_alpha_hat, state_.e_beta_hat);
    if (have_emf_angle_) {
      window_rotation_ += wrap_angle(angle - last_emf_angle_);
    }
    last_emf_angle_ = angle;
    have_emf_angle_ = true;
    if (magnitude < params_.direction_emf_floor) {
      window_above_floor_ = false;
    }
  }

  window_elapsed_ += dt;
  if (window_elapsed_ < params_.direction_window) {
    return;
  }
  if (window_above_floor_ &&
      std::abs(window_rotation_) >= params_.direction_min_rotation) {
    state_.direction = window_rotation_ > 0.0 ? 1 : -1;
  }
  window_rotation_ = 0.0;
  window_elapsed_ = 0.0;
  window_above_floor_ = true;
}

std::string_view to_string(SwitchingFunction f) {
  return f == SwitchingFunction::saturation ? "saturation" : "sign";
}

}  // namespace pmsm
