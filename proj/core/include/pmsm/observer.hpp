#pragma once

#include <string_view>

#include "pmsm/frames.hpp"
#include "pmsm/plant.hpp"

namespace pmsm {

enum class SwitchingFunction { sign, saturation };

struct SmoParams {
  double k = 0.0;        // V, sliding-mode gain
  double tau0 = 0.0;     // s, back-EMF low-pass time constant
  double omega_c = 0.0;  // rad/s, cutoff used for phase compensation
  SwitchingFunction switching = SwitchingFunction::sign;
  double boundary_width = 0.05;  // A, linear region of `saturation`
  double emf_epsilon = 0.01;     // V, below this the angle is unobservable

  // Rotation-direction detection: the EMF angle advance is accumulated over
  // `direction_window` seconds and the sign is re-latched only when the EMF
  // magnitude stayed above `direction_emf_floor` and the advance exceeds
  // `direction_min_rotation` rad.
  double direction_window = 5e-4;
  double direction_emf_floor = 2.0;
  double direction_min_rotation = 0.02;

  void validate() const;
  bool operator==(const SmoParams&) const = default;
};

struct ObserverState {
  double i_alpha_hat = 0.0;
  double i_beta_hat = 0.0;
  double e_alpha_hat = 0.0;
  double e_beta_hat = 0.0;
  double theta_hat = 0.0;    // rad, [-pi, pi)
  double omega_e_hat = 0.0;  // rad/s, signed
  int direction = 1;         // latched rotation sign of the EMF vector
  bool position_valid = false;
};

/// Estimation error i_hat - i in the stationary frame.
struct CurrentError {
  double e_ia = 0.0;
  double e_ib = 0.0;
};

struct PositionEstimate {
  double theta = 0.0;
  bool valid = false;
};

/// Current-model derivative of the observer; the correction `v_ab` enters
/// where the machine sees its back-EMF.
AlphaBeta observer_derivatives(const ObserverState& obs, const AlphaBeta& u_ab,
                               const AlphaBeta& v_ab, double omega_e_hat,
                               const MotorParams& p);

/// v = k * switching(error) per axis, with sgn(0) = 0.
AlphaBeta sliding_control(const CurrentError& err, const SmoParams& s);

/// Forward-Euler step of the first-order back-EMF filter driven by `v_ab`.
AlphaBeta filter_emf(const ObserverState& obs, const AlphaBeta& v_ab,
                     const SmoParams& s, double dt);

/// arctan(omega_e_hat / omega_c): the filter's phase lag at that frequency
/// when omega_c = 1/tau0.
double phase_compensation(double omega_e_hat, const SmoParams& s);

/// Rotor angle from the filtered EMF vector plus lag compensation. With an
/// EMF magnitude below `emf_epsilon` the previous angle is returned flagged
/// invalid.
PositionEstimate extract_position(const ObserverState& obs, const SmoParams& s);

/// |e_hat| / psi_f, signed by the latched rotation direction.
double extract_speed(const ObserverState& obs, const MotorParams& p);

/// Stateful observer combining the operations above, advanced once per
/// plant step. The current model is integrated with rk3_step, the EMF
/// filter with forward Euler.
class SlidingModeObserver {
 public:
  SlidingModeObserver(const MotorParams& motor, const SmoParams& params);

  /// `i_meas` is the measured stator current, `u_ab` the applied voltage.
  /// Both are held over the step.
  void update(const AlphaBeta& i_meas, const AlphaBeta& u_ab, double dt);

  const ObserverState& state() const { return state_; }
  const CurrentError& last_error() const { return last_error_; }
  const SmoParams& params() const { return params_; }

 private:
  void track_direction(double dt);

  MotorParams motor_;
  SmoParams params_;
  ObserverState state_;
  CurrentError last_error_;

  double last_emf_angle_ = 0.0;
  bool have_emf_angle_ = false;
  double window_rotation_ = 0.0;
  double window_elapsed_ = 0.0;
  bool window_above_floor_ = true;
};

std::string_view to_string(SwitchingFunction f);

}  // namespace pmsm
