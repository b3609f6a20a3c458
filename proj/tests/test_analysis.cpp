#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include <gtest/gtest.h>

#include "pmsm/analysis.hpp"

namespace pmsm {
namespace {

constexpr double kDt = 1e-6;

// Log sampled every `every` steps of kDt over [t0, t0 + span], speed given in
// r/min as a function of time since t0.
RunLog synthetic(const std::function<double(double)>& rpm, double span,
                 int every = 1, double t0 = 0.0) {
  RunLog log;
  log.dt = kDt;
  log.log_every = every;
  log.pole_pairs = 4;
  const long steps = std::lround(span / kDt);
  for (long n = 0; n <= steps; n += every) {
    RunRecord r;
    const double tau = n * kDt;
    r.t = t0 + tau;
    r.omega_m = rpm_to_rad_per_s(rpm(tau));
    log.records.push_back(r);
  }
  return log;
}

double first_order(double t, double a, double tau) {
  return a * (1.0 - std::exp(-t / tau));
}

TEST(StepMetrics, FirstOrderResponse) {
  const double tau = 2e-3;
  const RunLog log =
      synthetic([&](double t) { return first_order(t, 1000.0, tau); }, 0.05);
  const StepMetrics m = step_metrics(log, 0.0, 1000.0);
  EXPECT_EQ(m.overshoot_pct, 0.0);
  EXPECT_TRUE(m.settled);
  EXPECT_NEAR(m.settling_time_s, tau * std::log(20.0), 1e-6);
  EXPECT_NEAR(m.settling_time_s, 2.996 * tau, 1e-5);
}

// Underdamped second-order step response to 1000 whose first (and global)
// maximum, reached at pi / wd, equals `peak`.
double overshooting(double t, double peak) {
  const double wd = 1500.0;
  const double sigma = -wd * std::log(peak / 1000.0 - 1.0) / std::numbers::pi;
  return 1000.0 * (1.0 - std::exp(-sigma * t) *
                             (std::cos(wd * t) + sigma / wd * std::sin(wd * t)));
}

TEST(StepMetrics, OvershootFromPeak) {
  for (double peak : {1700.0, 1050.0}) {
    const RunLog log =
        synthetic([&](double t) { return overshooting(t, peak); }, 0.05);
    const StepMetrics m = step_metrics(log, 0.0, 1000.0);
    EXPECT_NEAR(m.peak_rpm, peak, 0.01);
    EXPECT_NEAR(m.overshoot_pct, (peak - 1000.0) / 10.0, 1e-3);
  }
}

TEST(StepMetrics, MonotoneTraceHasNoOvershoot) {
  const RunLog log = synthetic([](double t) { return 800.0 * t / 0.05; }, 0.05);
  EXPECT_EQ(step_metrics(log, 0.0, 1000.0).overshoot_pct, 0.0);
}

TEST(StepMetrics, InBandTraceSettlesAtStepTime) {
  const RunLog log = synthetic(
      [](double t) { return 1000.0 + 10.0 * std::sin(2000.0 * t); }, 0.05);
  const StepMetrics m =
      step_metrics(log, StepWindow{0.01, 1000.0, 0.0, std::nullopt});
  EXPECT_TRUE(m.settled);
  EXPECT_DOUBLE_EQ(m.settling_time_s, 0.01);
}

TEST(StepMetrics, UnsettledTraceFlagged) {
  const RunLog log = synthetic(
      [](double t) { return 1000.0 + 200.0 * std::sin(2000.0 * t); }, 0.05);
  const StepMetrics m = step_metrics(log, 0.0, 1000.0);
  EXPECT_FALSE(m.settled);
  EXPECT_NEAR(m.settling_time_s, 0.05, 1e-12);
}

TEST(StepMetrics, DownwardStep) {
  const double tau = 1e-3;
  const RunLog log = synthetic(
      [&](double t) { return 800.0 - first_order(t, 200.0, tau); }, 0.04);
  const StepMetrics m =
      step_metrics(log, StepWindow{0.0, 600.0, 800.0, std::nullopt});
  EXPECT_EQ(m.overshoot_pct, 0.0);
  EXPECT_NEAR(m.settling_time_s, tau * std::log(20.0), 1e-6);
}

TEST(StepMetrics, SteadyStateAndRipple) {
  const RunLog log = synthetic(
      [](double t) { return t < 0.03 ? 500.0 : 1002.0 + std::sin(1e5 * t); },
      0.1);
  const StepMetrics m = step_metrics(log, 0.0, 1000.0);
  EXPECT_NEAR(m.final_rpm, 1002.0, 0.05);
  EXPECT_NEAR(m.steady_state_error, 2.0, 0.05);
  EXPECT_NEAR(m.ripple_pct, 1.0 / std::sqrt(2.0) / 1000.0 * 100.0, 0.002);
}

TEST(StepMetrics, ShortWindowRejected) {
  const RunLog log = synthetic([](double) { return 0.0; }, 0.019);
  EXPECT_THROW(step_metrics(log, 0.0, 1000.0), std::invalid_argument);
}

TEST(StepMetrics, InvariantUnderTimeShiftAndDecimation) {
  auto trace = [](double t) { return overshooting(t, 1300.0); };
  const RunLog base = synthetic(trace, 0.05);
  const StepMetrics ref = step_metrics(base, 0.0, 1000.0);

  const RunLog shifted = synthetic(trace, 0.05, 1, 0.37);
  const StepMetrics s = step_metrics(shifted, 0.37, 1000.0);
  EXPECT_NEAR(s.overshoot_pct, ref.overshoot_pct, 1e-9);
  EXPECT_NEAR(s.settling_time_s - 0.37, ref.settling_time_s, 1e-9);

  for (int every : {2, 5, 10}) {
    const RunLog dec = synthetic(trace, 0.05, every);
    const StepMetrics d = step_metrics(dec, 0.0, 1000.0);
    EXPECT_NEAR(d.overshoot_pct, ref.overshoot_pct, 0.02 * ref.overshoot_pct);
    EXPECT_NEAR(d.settling_time_s, ref.settling_time_s,
                0.02 * ref.settling_time_s);
    EXPECT_NEAR(d.ripple_pct, ref.ripple_pct, 0.02 * ref.ripple_pct + 1e-9);
  }
}

RunLog angle_log(const std::function<double(double)>& theta,
                 const std::function<double(double)>& theta_hat,
                 double span = 0.02) {
  RunLog log = synthetic([](double) { return 600.0; }, span, 10);
  for (RunRecord& r : log.records) {
    r.theta_e = wrap_angle(theta(r.t));
    r.theta_hat = wrap_angle(theta_hat(r.t));
    r.omega_e_hat = log.pole_pairs * r.omega_m;
  }
  return log;
}

TEST(TrackingMetrics, PerfectEstimate) {
  auto th = [](double t) { return 251.3 * t; };
  const TrackingMetrics m = tracking_metrics(angle_log(th, th), 0.0);
  EXPECT_EQ(m.max_angle_error_deg, 0.0);
  EXPECT_EQ(m.mean_speed_error_pct, 0.0);
  EXPECT_EQ(m.convergence_time_s, 0.0);
}

TEST(TrackingMetrics, ConstantLagInDegrees) {
  auto th = [](double t) { return 251.3 * t; };
  auto lag = [&](double t) { return th(t) - 0.0175; };
  const TrackingMetrics m = tracking_metrics(angle_log(th, lag), 0.0);
  EXPECT_NEAR(m.max_angle_error_deg, 0.0175 * 180.0 / std::numbers::pi, 1e-9);
  EXPECT_NEAR(m.max_angle_error_deg, 1.0, 3e-3);
}

TEST(TrackingMetrics, ExcludesConvergenceWindowAndIntervals) {
  auto th = [](double t) { return 251.3 * t; };
  auto est = [&](double t) {
    const bool bad = t < 0.005 || (t >= 0.012 && t < 0.014);
    return th(t) + (bad ? 1.0 : 0.01);
  };
  const RunLog log = angle_log(th, est);
  EXPECT_GT(tracking_metrics(log, 0.0).max_angle_error_deg, 50.0);
  EXPECT_GT(tracking_metrics(log, 0.005).max_angle_error_deg, 50.0);
  const TrackingMetrics m =
      tracking_metrics(log, 0.005, {TimeInterval{0.012, 0.014}});
  EXPECT_NEAR(m.max_angle_error_deg, 0.01 * 180.0 / std::numbers::pi, 1e-9);
  EXPECT_NEAR(m.convergence_time_s, 0.01399, 2e-5);
}

TEST(AngleError, WrapsAcrossBranchCut) {
  EXPECT_NEAR(angle_error(-3.13, 3.14), 2.0 * std::numbers::pi - 6.27, 1e-12);
  EXPECT_NEAR(angle_error(-3.13, 3.14), 0.0132, 1e-4);
  for (double a = -10.0; a < 10.0; a += 0.37) {
    for (double b = -10.0; b < 10.0; b += 0.53) {
      const double e = angle_error(a, b);
      ASSERT_GE(e, 0.0);
      ASSERT_LE(e, std::numbers::pi);
    }
  }
}

TEST(DisturbanceMetrics, DipAndRecovery) {
  const RunLog log = synthetic(
      [](double t) {
        if (t < 0.02) return 1000.0;
        const double x = (t - 0.02) / 1e-3;
        return 1000.0 - 150.0 * x * std::exp(1.0 - x);  // 15% dip at 1 ms
      },
      0.05);
  const DisturbanceMetrics m = disturbance_metrics(log, 0.02, 1000.0);
  EXPECT_TRUE(m.recovered);
  EXPECT_NEAR(m.max_deviation_pct, 15.0, 1e-6);
  EXPECT_GT(m.recovery_time_s, 0.02);
  EXPECT_LT(m.recovery_time_s, 0.05);

  const RunLog stuck = synthetic(
      [](double t) { return t < 0.02 ? 1000.0 : 900.0; }, 0.05);
  const DisturbanceMetrics s = disturbance_metrics(stuck, 0.02, 1000.0);
  EXPECT_FALSE(s.recovered);
  EXPECT_NEAR(s.max_deviation_pct, 10.0, 1e-9);
}

TEST(CompareReport, IdenticalLogsGiveIdenticalRows) {
  const RunLog log = synthetic(
      [](double t) { return overshooting(t, 1200.0); }, 0.05);
  const ComparisonReport r =
      compare_report({{"a", &log, {0.0, 1000.0, {}, {}}},
                      {"b", &log, {0.0, 1000.0, {}, {}}}});
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].metrics.overshoot_pct, r.rows[1].metrics.overshoot_pct);
  EXPECT_EQ(r.rows[0].metrics.settling_time_s,
            r.rows[1].metrics.settling_time_s);
  EXPECT_EQ(r.rows[0].metrics.ripple_pct, r.rows[1].metrics.ripple_pct);

  const std::string table = format_table(r);
  EXPECT_NE(table.find("overshoot_%"), std::string::npos);
  EXPECT_NE(table.find("\na "), std::string::npos);
  const std::string csv = format_csv(r);
  EXPECT_EQ(csv.rfind("label,setpoint_rpm,overshoot_pct", 0), 0u);
}

TEST(CompareReport, RejectsMismatch) {
  const RunLog a = synthetic([](double) { return 1000.0; }, 0.05);
  const RunLog b = synthetic([](double) { return 1000.0; }, 0.04);
  EXPECT_THROW(compare_report({{"a", &a, {0.0, 1000.0, {}, {}}},
                               {"b", &b, {0.0, 1000.0, {}, {}}}}),
               std::invalid_argument);
  EXPECT_THROW(compare_report({{"a", &a, {0.0, 1000.0, {}, {}}}}),
               std::invalid_argument);
}

}  // namespace
}  // namespace pmsm
