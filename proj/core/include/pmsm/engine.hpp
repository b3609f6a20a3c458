#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "pmsm/control.hpp"
#include "pmsm/observer.hpp"
#include "pmsm/plant.hpp"

namespace pmsm {

struct SimConfig {
  double dt = 2e-7;
  double t_end = 0.1;
  std::optional<double> controller_dt;  // defaults to dt
  int log_every = 10;
  std::optional<std::uint64_t> seed;    // reserved for noise injection
  // When false the observer is not integrated; only valid for variants that
  // do not consume its estimates.
  bool simulate_observer = true;

  void validate() const;
  double effective_controller_dt() const { return controller_dt.value_or(dt); }
  bool operator==(const SimConfig&) const = default;
};

enum class ControllerVariant { smo_sensorless, pi_sensored, open_loop };

struct SetpointEvent {
  double time = 0.0;  // s
  double rpm = 0.0;   // mechanical r/min

  bool operator==(const SetpointEvent&) const = default;
};

struct LoadEvent {
  double time = 0.0;    // s
  double torque = 0.0;  // N m

  bool operator==(const LoadEvent&) const = default;
};

struct Scenario {
  std::vector<SetpointEvent> speed_schedule;
  std::vector<LoadEvent> load_schedule;
  ControllerVariant variant = ControllerVariant::smo_sensorless;
  PlantState initial_state;

  /// Schedules must be sorted and lie within [0, t_end].
  void validate(double t_end) const;
  bool operator==(const Scenario&) const = default;
};

struct ControlSettings {
  SpeedLoopDesign speed;
  CurrentLoopDesign current;
  double iq_max = 4.5;  // A
  // Open-loop (I/f) variant: a current vector of q magnitude
  // open_loop_boost * xi * w* / (1.5 pn psi_f) placed at the angle obtained
  // by integrating the commanded electrical speed. The position sensor is
  // only used for the logged speed.
  double open_loop_boost = 3.0;

  void validate() const;
};

struct RunRecord {
  double t = 0.0;
  double i_d = 0.0;
  double i_q = 0.0;
  double omega_m = 0.0;
  double theta_e = 0.0;
  double u_d_ref = 0.0;
  double u_q_ref = 0.0;
  double theta_hat = 0.0;
  double omega_e_hat = 0.0;
  double e_alpha_hat = 0.0;
  double e_beta_hat = 0.0;
  double omega_m_ref = 0.0;
  double i_q_ref = 0.0;
  double T_L = 0.0;

  bool operator==(const RunRecord&) const = default;
};

struct RunLog {
  std::vector<RunRecord> records;
  double dt = 0.0;    // integration step the log was produced with
  int log_every = 1;  // decimation factor
  int pole_pairs = 1;

  double horizon() const { return records.empty() ? 0.0 : records.back().t; }
  bool operator==(const RunLog&) const = default;
};

/// Number of integration steps covering [0, t_end].
std::int64_t step_count(double t_end, double dt);

/// Executes one closed-loop simulation. Throws InvariantError/ConfigError
/// for invalid inputs and SimulationFault when the state diverges.
RunLog run(const Scenario& scenario, const SimConfig& sim,
           const MotorParams& p, const ControlSettings& control,
           const SmoParams& smo);

inline constexpr std::string_view kRunLogCsvHeader =
    "t,i_d,i_q,omega_m,theta_e,u_d_ref,u_q_ref,theta_hat,omega_e_hat,"
    "e_alpha_hat,e_beta_hat,omega_m_ref,i_q_ref,T_L";

/// One header row, one row per record, 9 significant digits.
void write_csv(std::ostream& out, const RunLog& log);

double rpm_to_rad_per_s(double rpm);
double rad_per_s_to_rpm(double omega);

std::string_view to_string(ControllerVariant v);

}  // namespace pmsm
