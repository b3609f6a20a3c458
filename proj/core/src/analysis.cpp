#include "pmsm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "pmsm/frames.hpp"

namespace pmsm {

namespace {

constexpr double kMinimumWindow = 0.02;
constexpr double kTailFraction = 0.1;

double speed_rpm(const RunRecord& r) { return rad_per_s_to_rpm(r.omega_m); }

}  // namespace

StepMetrics step_metrics(const RunLog& log, const StepWindow& window) {
  const auto& rec = log.records;
  if (rec.empty()) throw std::invalid_argument("step_metrics: empty log");
  const double end = window.end_time.value_or(log.horizon());
  const double tol = 1e-9 * std::max(1.0, end);
  if (end - window.step_time < kMinimumWindow - tol || end > log.horizon() + tol) {
    throw std::invalid_argument(
        "step_metrics: log must extend at least 20 ms past the step");
  }

  auto first = std::lower_bound(
      rec.begin(), rec.end(), window.step_time - tol,
      [](const RunRecord& r, double t) { return r.t < t; });
  auto last = std::upper_bound(
      rec.begin(), rec.end(), end + tol,
      [](double t, const RunRecord& r) { return t < r.t; });
  if (std::distance(first, last) < 2) {
    throw std::invalid_argument("step_metrics: window holds too few samples");
  }

  const double setpoint = window.setpoint_rpm;
  const double initial = window.initial_rpm.value_or(speed_rpm(*first));
  double magnitude = setpoint - initial;
  if (std::abs(magnitude) < 1e-9) {
    magnitude = std::abs(setpoint) > 0.0 ? setpoint : 1e-9;
  }
  const double direction = magnitude > 0.0 ? 1.0 : -1.0;
  const double band = kSettlingBand * std::abs(magnitude);

  StepMetrics m;
  double peak = speed_rpm(*first);
  for (auto it = first; it != last; ++it) {
    peak = direction > 0.0 ? std::max(peak, speed_rpm(*it))
                           : std::min(peak, speed_rpm(*it));
  }
  m.peak_rpm = peak;
  m.overshoot_pct =
      std::max(0.0, direction * (peak - setpoint) / std::abs(magnitude) * 100.0);

  // Last sample outside the band; the crossing after it is interpolated.
  auto outside = last;
  for (auto it = last; it != first;) {
    --it;
    if (std::abs(speed_rpm(*it) - setpoint) > band) {
      outside = it;
      break;
    }
  }
  if (outside == last) {
    m.settled = true;
    m.settling_time_s = window.step_time;
  } else if (std::next(outside) == last) {
    m.settled = false;
    m.settling_time_s = end;
  } else {
    const auto inside = std::next(outside);
    const double e0 = std::abs(speed_rpm(*outside) - setpoint) - band;
    const double e1 = std::abs(speed_rpm(*inside) - setpoint) - band;
    const double frac = e0 / (e0 - e1);
    m.settled = true;
    m.settling_time_s = outside->t + frac * (inside->t - outside->t);
  }

  const double tail_start = end - kTailFraction * (end - window.step_time);
  double sum = 0.0;
  double sum_abs_err = 0.0;
  std::size_t n = 0;
  for (auto it = first; it != last; ++it) {
    if (it->t + tol < tail_start) continue;
    const double v = speed_rpm(*it);
    sum += v;
    sum_abs_err += std::abs(v - setpoint);
    ++n;
  }
  m.final_rpm = sum / static_cast<double>(n);
  m.steady_state_error = sum_abs_err / static_cast<double>(n);
  double var = 0.0;
  for (auto it = first; it != last; ++it) {
    if (it->t + tol < tail_start) continue;
    const double dv = speed_rpm(*it) - m.final_rpm;
    var += dv * dv;
  }
  const double stddev = std::sqrt(var / static_cast<double>(n));
  m.ripple_pct =
      std::abs(setpoint) > 0.0 ? stddev / std::abs(setpoint) * 100.0 : 0.0;
  return m;
}

StepMetrics step_metrics(const RunLog& log, double step_time,
                         double setpoint_rpm) {
  return step_metrics(log, StepWindow{step_time, setpoint_rpm, {}, {}});
}

DisturbanceMetrics disturbance_metrics(const RunLog& log, double event_time,
                                       double setpoint_rpm,
                                       std::optional<double> end_time) {
  const double end = end_time.value_or(log.horizon());
  const double band = kSettlingBand * std::abs(setpoint_rpm);
  DisturbanceMetrics m;
  m.recovery_time_s = event_time;
  bool any = false;
  bool last_inside = true;
  for (const RunRecord& r : log.records) {
    if (r.t < event_time || r.t > end) continue;
    any = true;
    const double dev = std::abs(speed_rpm(r) - setpoint_rpm);
    m.max_deviation_rpm = std::max(m.max_deviation_rpm, dev);
    last_inside = dev <= band;
    if (!last_inside) m.recovery_time_s = r.t;
  }
  if (!any) throw std::invalid_argument("disturbance_metrics: empty window");
  m.max_deviation_pct = std::abs(setpoint_rpm) > 0.0
                            ? m.max_deviation_rpm / std::abs(setpoint_rpm) * 100.0
                            : 0.0;
  m.recovered = last_inside;
  if (!m.recovered) m.recovery_time_s = end;
  return m;
}

double angle_error(double theta_hat, double theta) {
  return std::abs(wrap_angle(theta_hat - theta));
}

TrackingMetrics tracking_metrics(const RunLog& log, double convergence_window,
                                 const std::vector<TimeInterval>& excluded,
                                 double convergence_deg) {
  TrackingMetrics m;
  if (log.records.empty()) return m;
  constexpr double kRadToDeg = 180.0 / std::numbers::pi;
  const double start = log.records.front().t + convergence_window;
  const int pn = std::max(1, log.pole_pairs);

  double speed_err_sum = 0.0;
  std::size_t speed_samples = 0;
  for (const RunRecord& r : log.records) {
    if (r.t < start) continue;
    const bool skip = std::any_of(
        excluded.begin(), excluded.end(),
        [&](const TimeInterval& w) { return r.t >= w.begin && r.t < w.end; });
    if (skip) continue;
    ++m.samples;
    m.max_angle_error_deg = std::max(
        m.max_angle_error_deg, angle_error(r.theta_hat, r.theta_e) * kRadToDeg);
    // Relative speed error is undefined near standstill.
    if (std::abs(r.omega_m) > 1.0) {
      speed_err_sum +=
          std::abs(r.omega_e_hat / pn - r.omega_m) / std::abs(r.omega_m);
      ++speed_samples;
    }
  }
  if (speed_samples > 0) {
    m.mean_speed_error_pct =
        speed_err_sum / static_cast<double>(speed_samples) * 100.0;
  }

  m.convergence_time_s = log.records.front().t;
  for (auto it = log.records.rbegin(); it != log.records.rend(); ++it) {
    if (angle_error(it->theta_hat, it->theta_e) * kRadToDeg > convergence_deg) {
      m.convergence_time_s = it->t;
      break;
    }
  }
  return m;
}

ComparisonReport compare_report(const std::vector<ComparisonEntry>& entries) {
  if (entries.size() < 2) {
    throw std::invalid_argument("compare_report: need at least two logs");
  }
  ComparisonReport report;
  const double horizon = entries.front().log->horizon();
  for (const ComparisonEntry& e : entries) {
    if (e.log == nullptr) throw std::invalid_argument("compare_report: null log");
    if (std::abs(e.log->horizon() - horizon) > 1e-9 * std::max(1.0, horizon)) {
      throw std::invalid_argument("compare_report: log horizons differ");
    }
    report.rows.push_back({e.label, e.window.setpoint_rpm,
                           step_metrics(*e.log, e.window)});
  }
  return report;
}

std::string format_table(const ComparisonReport& report) {
  std::size_t width = 5;
  for (const auto& row : report.rows) width = std::max(width, row.label.size());
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s %10s %12s %12s %8s %12s %10s\n",
                static_cast<int>(width), "label", "setpoint", "overshoot_%",
                "settling_s", "settled", "sse_rpm", "ripple_%");
  out << line;
  for (const auto& row : report.rows) {
    const StepMetrics& m = row.metrics;
    std::snprintf(line, sizeof line,
                  "%-*s %10.1f %12.2f %12.5f %8s %12.3f %10.4f\n",
                  static_cast<int>(width), row.label.c_str(), row.setpoint_rpm,
                  m.overshoot_pct, m.settling_time_s, m.settled ? "yes" : "no",
                  m.steady_state_error, m.ripple_pct);
    out << line;
  }
  return out.str();
}

std::string format_csv(const ComparisonReport& report) {
  std::ostringstream out;
  out << "label,setpoint_rpm,overshoot_pct,settling_time_s,settled,"
         "steady_state_error_rpm,ripple_pct,peak_rpm,final_rpm\n";
  char line[256];
  for (const auto& row : report.rows) {
    const StepMetrics& m = row.metrics;
    std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g,%d,%.9g,%.9g,%.9g,%.9g\n",
                  row.setpoint_rpm, m.overshoot_pct, m.settling_time_s,
                  m.settled ? 1 : 0, m.steady_state_error, m.ripple_pct,
                  m.peak_rpm, m.final_rpm);
    out << row.label << ',' << line;
  }
  return out.str();
}

}  // namespace pmsm
