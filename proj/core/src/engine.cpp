#include "pmsm/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>

#include "pmsm/errors.hpp"
#include "pmsm/frames.hpp"
#include "pmsm/integrator.hpp"

namespace pmsm {

namespace {

// Schedule times and step instants are compared with this slack so that an
// event at t = k*dt fires on step k despite rounding in k*dt.
constexpr double kEventSlackSteps = 1e-6;

template <typename Event>
void require_sorted(const std::vector<Event>& events, double t_end,
                    const char* name) {
  double previous = -1.0;
  for (const Event& e : events) {
    if (!std::isfinite(e.time) || e.time < 0.0 || e.time > t_end) {
      throw InvariantError(std::string(name) + ": event time outside [0, t_end]");
    }
    if (e.time < previous) {
      throw InvariantError(std::string(name) + ": events not sorted by time");
    }
    previous = e.time;
  }
}

using PlantVector = StateVector<4>;

PlantVector to_vector(const PlantState& s) {
  return {s.i_d, s.i_q, s.omega_m, s.theta_e};
}

PlantState to_state(const PlantVector& y) { return {y[0], y[1], y[2], y[3]}; }

}  // namespace

void SimConfig::validate() const {
  if (!std::isfinite(dt) || dt <= 0.0) {
    throw InvariantError("sim.dt must be > 0");
  }
  if (!std::isfinite(t_end) || t_end < 0.0) {
    throw InvariantError("sim.t_end must be >= 0");
  }
  const double cdt = effective_controller_dt();
  if (!std::isfinite(cdt) || cdt < dt) {
    throw InvariantError("sim.controller_dt must be >= dt");
  }
  if (t_end > 0.0 && cdt > t_end) {
    throw InvariantError("sim.controller_dt must be <= t_end");
  }
  if (log_every < 1) {
    throw InvariantError("sim.log_every must be >= 1");
  }
}

void Scenario::validate(double t_end) const {
  require_sorted(speed_schedule, t_end, "speed_schedule");
  require_sorted(load_schedule, t_end, "load_schedule");
  for (const auto& e : speed_schedule) {
    if (!std::isfinite(e.rpm)) throw InvariantError("non-finite setpoint");
  }
  for (const auto& e : load_schedule) {
    if (!std::isfinite(e.torque)) throw InvariantError("non-finite load");
  }
  const PlantState& s = initial_state;
  if (!std::isfinite(s.i_d) || !std::isfinite(s.i_q) ||
      !std::isfinite(s.omega_m) || !std::isfinite(s.theta_e)) {
    throw InvariantError("initial state must be finite");
  }
}

void ControlSettings::validate() const {
  if (!(speed.K_pw > 0.0) || !(speed.K_iw > 0.0) || !(speed.xi_a >= 0.0)) {
    throw InvariantError("speed-loop gains must satisfy K_pw, K_iw > 0, xi_a >= 0");
  }
  if (!(current.K_pd > 0.0) || !(current.K_id > 0.0) ||
      !(current.K_pq > 0.0) || !(current.K_iq > 0.0)) {
    throw InvariantError("current-loop gains must be > 0");
  }
  if (!(iq_max > 0.0)) throw InvariantError("control.iq_max must be > 0");
  if (!std::isfinite(open_loop_boost) || open_loop_boost < 0.0) {
    throw InvariantError("control.open_loop_boost must be >= 0");
  }
}

std::int64_t step_count(double t_end, double dt) {
  const double ratio = t_end / dt;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest)) {
    return static_cast<std::int64_t>(nearest);
  }
  return static_cast<std::int64_t>(std::floor(ratio));
}

double rpm_to_rad_per_s(double rpm) { return rpm * kTwoPi / 60.0; }
double rad_per_s_to_rpm(double omega) { return omega * 60.0 / kTwoPi; }

RunLog run(const Scenario& scenario, const SimConfig& sim, const MotorParams& p,
           const ControlSettings& control, const SmoParams& smo) {
  p.validate();
  sim.validate();
  scenario.validate(sim.t_end);
  control.validate();
  smo.validate();
  const bool sensorless = scenario.variant == ControllerVariant::smo_sensorless;
  const bool open_loop = scenario.variant == ControllerVariant::open_loop;
  if (sensorless && !sim.simulate_observer) {
    throw InvariantError("smo_sensorless requires the observer to be simulated");
  }

  const double dt = sim.dt;
  const std::int64_t steps = step_count(sim.t_end, dt);
  const std::int64_t controller_every =
      std::max<std::int64_t>(1, std::llround(sim.effective_controller_dt() / dt));
  const double controller_dt = static_cast<double>(controller_every) * dt;

  RunLog log;
  log.dt = dt;
  log.log_every = sim.log_every;
  log.pole_pairs = p.pn;
  log.records.reserve(static_cast<std::size_t>(steps / sim.log_every + 1));

  PlantState plant = scenario.initial_state;
  plant.theta_e = wrap_angle(plant.theta_e);
  std::optional<SlidingModeObserver> observer;
  if (sim.simulate_observer) observer.emplace(p, smo);

  PiState speed_pi = PiState::symmetric(control.iq_max);
  PiState d_pi = PiState::symmetric(p.u_max);
  PiState q_pi = PiState::symmetric(p.u_max);

  std::size_t next_speed = 0;
  std::size_t next_load = 0;
  double omega_ref = 0.0;
  LoadInput load;
  double iq_ref = 0.0;
  DqPair u_cmd;
  AlphaBeta u_ab;
  // Open loop: the current vector rotates at the commanded frequency and the
  // rotor is pulled along by the synchronizing torque.
  double open_loop_angle = plant.theta_e;

  for (std::int64_t n = 0;; ++n) {
    const double t = static_cast<double>(n) * dt;
    const double t_fire = t + kEventSlackSteps * dt;
    while (next_speed < scenario.speed_schedule.size() &&
           scenario.speed_schedule[next_speed].time <= t_fire) {
      omega_ref = rpm_to_rad_per_s(scenario.speed_schedule[next_speed++].rpm);
    }
    while (next_load < scenario.load_schedule.size() &&
           scenario.load_schedule[next_load].time <= t_fire) {
      load.T_L = scenario.load_schedule[next_load++].torque;
    }

    const AlphaBeta i_ab = inverse_park({plant.i_d, plant.i_q}, plant.theta_e);

    if (n % controller_every == 0) {
      double theta_fb = plant.theta_e;
      double omega_fb = plant.omega_m;
      if (sensorless) {
        theta_fb = observer->state().theta_hat;
        omega_fb = observer->state().omega_e_hat / p.pn;
      } else if (open_loop) {
        theta_fb = open_loop_angle;
        omega_fb = omega_ref;
      }
      const DqPair i_meas = park(i_ab, theta_fb);

      if (open_loop) {
        iq_ref = std::clamp(control.open_loop_boost * p.xi * omega_ref /
                                p.torque_constant(),
                            -control.iq_max, control.iq_max);
      } else {
        iq_ref = speed_step(omega_ref, omega_fb, control.speed, speed_pi,
                            controller_dt);
      }
      u_cmd = current_step({0.0, iq_ref}, i_meas, p.pn * omega_fb,
                           control.current, d_pi, q_pi, p, controller_dt);
      u_cmd = limit_voltage(u_cmd, p.u_max);
      u_ab = inverse_park(u_cmd, theta_fb);
    }

    if (n % sim.log_every == 0) {
      RunRecord r;
      r.t = t;
      r.i_d = plant.i_d;
      r.i_q = plant.i_q;
      r.omega_m = plant.omega_m;
      r.theta_e = plant.theta_e;
      r.u_d_ref = u_cmd.d;
      r.u_q_ref = u_cmd.q;
      if (observer) {
        const ObserverState& o = observer->state();
        r.theta_hat = o.theta_hat;
        r.omega_e_hat = o.omega_e_hat;
        r.e_alpha_hat = o.e_alpha_hat;
        r.e_beta_hat = o.e_beta_hat;
      }
      r.omega_m_ref = omega_ref;
      r.i_q_ref = iq_ref;
      r.T_L = load.T_L;
      log.records.push_back(r);
    }
    if (n == steps) break;

    const PlantVector next = rk3_step<4>(
        to_vector(plant),
        [&](const PlantVector& y) {
          const PlantState s = to_state(y);
          const DqPair u = park(u_ab, s.theta_e);
          const CurrentDerivatives di = electrical_derivatives(s, u, p);
          const double Te = torque(s, p);
          return PlantVector{di.di_d, di.di_q,
                             mechanical_derivative(s, Te, load, p),
                             angle_derivative(s, p)};
        },
        dt);
    plant = to_state(next);
    plant.theta_e = wrap_angle(plant.theta_e);

    if (observer) observer->update(i_ab, u_ab, dt);
    if (open_loop) {
      open_loop_angle = wrap_angle(open_loop_angle + p.pn * omega_ref * dt);
    }
  }
  return log;
}

void write_csv(std::ostream& out, const RunLog& log) {
  out << kRunLogCsvHeader << '\n';
  char buf[32];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    out << buf << sep;
  };
  for (const RunRecord& r : log.records) {
    put(r.t, ',');
    put(r.i_d, ',');
    put(r.i_q, ',');
    put(r.omega_m, ',');
    put(r.theta_e, ',');
    put(r.u_d_ref, ',');
    put(r.u_q_ref, ',');
    put(r.theta_hat, ',');
    put(r.omega_e_hat, ',');
    put(r.e_alpha_hat, ',');
    put(r.e_beta_hat, ',');
    put(r.omega_m_ref, ',');
    put(r.i_q_ref, ',');
    put(r.T_L, '\n');
  }
}

std::string_view to_string(ControllerVariant v) {
  switch (v) {
    case ControllerVariant::smo_sensorless:
      return "smo_sensorless";
    case ControllerVariant::pi_sensored:
      return "pi_sensored";
    case ControllerVariant::open_loop:
      return "open_loop";
  }
  return "unknown";
}

}  // namespace pmsm
