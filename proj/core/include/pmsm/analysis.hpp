#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmsm/engine.hpp"

namespace pmsm {

inline constexpr double kSettlingBand = 0.05;

struct StepMetrics {
  double overshoot_pct = 0.0;       // percent of |step magnitude|
  double settling_time_s = 0.0;     // absolute time; window end if unsettled
  bool settled = false;
  double steady_state_error = 0.0;  // r/min, mean |error| over last 10%
  double peak_rpm = 0.0;            // extreme value in the step direction
  double final_rpm = 0.0;           // mean over last 10%
  double ripple_pct = 0.0;          // std over last 10%, percent of setpoint
};

struct StepWindow {
  double step_time = 0.0;
  double setpoint_rpm = 0.0;
  // Speed the step starts from; defaults to the logged speed at step_time.
  std::optional<double> initial_rpm;
  // End of the evaluation window; defaults to the end of the log.
  std::optional<double> end_time;
};

/// Overshoot, settling into the +/-5% band of |setpoint - initial| and
/// steady-state statistics of the mechanical speed. Throws
/// std::invalid_argument when the window holds less than 20 ms after the
/// step.
StepMetrics step_metrics(const RunLog& log, const StepWindow& window);
StepMetrics step_metrics(const RunLog& log, double step_time,
                         double setpoint_rpm);

struct TrackingMetrics {
  double max_angle_error_deg = 0.0;
  double mean_speed_error_pct = 0.0;
  double convergence_time_s = 0.0;
  std::size_t samples = 0;
};

struct TimeInterval {
  double begin = 0.0;
  double end = 0.0;
};

/// Position/speed estimation errors, skipping the first `convergence_window`
/// seconds and any `excluded` intervals. Convergence time is the earliest
/// instant after which the angle error stays within `convergence_deg`.
TrackingMetrics tracking_metrics(const RunLog& log, double convergence_window,
                                 const std::vector<TimeInterval>& excluded = {},
                                 double convergence_deg = 3.0);

struct DisturbanceMetrics {
  double max_deviation_rpm = 0.0;
  double max_deviation_pct = 0.0;  // percent of |setpoint|
  bool recovered = false;          // back inside +/-5% of setpoint by window end
  double recovery_time_s = 0.0;    // absolute; window end if not recovered
};

/// Speed excursion caused by a load event at `event_time` while holding
/// `setpoint_rpm`. The band is 5% of |setpoint|.
DisturbanceMetrics disturbance_metrics(const RunLog& log, double event_time,
                                       double setpoint_rpm,
                                       std::optional<double> end_time = {});

/// |wrap(theta_hat - theta)| in [0, pi].
double angle_error(double theta_hat, double theta);

struct ComparisonEntry {
  std::string label;
  const RunLog* log = nullptr;
  StepWindow window;
};

struct ComparisonRow {
  std::string label;
  double setpoint_rpm = 0.0;
  StepMetrics metrics;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
};

/// Tabulates step metrics for two or more logs of equal horizon.
ComparisonReport compare_report(const std::vector<ComparisonEntry>& entries);

std::string format_table(const ComparisonReport& report);
std::string format_csv(const ComparisonReport& report);

}  // namespace pmsm
