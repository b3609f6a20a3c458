#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pmsm/analysis.hpp"
#include "pmsm/errors.hpp"

namespace pmsm::cli {

namespace {

// Minimum post-event window a step needs before it is summarized.
constexpr double kMinStepWindow = 0.02;
constexpr double kTrackingConvergenceWindow = 0.02;

struct Loaded {
  ConfigFile config;
  int code = kOk;
};

// Maps the exception raised while loading/validating/running to an exit code.
int report_error(std::ostream& err) {
  try {
    throw;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigParseError;
  } catch (const InvariantError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return kInvariantViolation;
  } catch (const SimulationFault& e) {
    err << "simulation fault: " << e.what() << '\n';
    return kSimulationFault;
  } catch (const std::invalid_argument& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return kInvariantViolation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
}

Loaded load(const CommonOptions& opts, std::ostream& err) {
  Loaded l;
  try {
    l.config = load_config(opts.config);
    if (opts.log_every) l.config.sim.log_every = *opts.log_every;
    l.config.validate();
  } catch (...) {
    l.code = report_error(err);
  }
  return l;
}

void write_atomically(const std::filesystem::path& path, const std::string& data) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << data;
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string log_csv(const RunLog& log) {
  std::ostringstream csv;
  write_csv(csv, log);
  return csv.str();
}

RunLog simulate(const ConfigFile& c) {
  return run(c.scenario, c.sim, c.motor, c.control.synthesize(c.motor), c.smo);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

const std::vector<std::string>& sweepable_params() {
  static const std::vector<std::string> params{"speed", "k", "omega_c", "beta", "a"};
  return params;
}

ConfigFile apply_sweep_value(const ConfigFile& config, const std::string& param,
                             double value) {
  ConfigFile c = config;
  if (param == "speed") {
    // The first schedule entry becomes the only step.
    const double t = c.scenario.speed_schedule.empty()
                         ? 0.0
                         : c.scenario.speed_schedule.front().time;
    c.scenario.speed_schedule = {{t, value}};
  } else if (param == "k") {
    c.smo.k = value;
  } else if (param == "omega_c") {
    c.smo.omega_c = value;
  } else if (param == "beta") {
    c.control.beta = value;
    c.control.K_pw.reset();
    c.control.K_iw.reset();
    c.control.xi_a.reset();
  } else if (param == "a") {
    c.control.a = value;
    c.control.K_pd.reset();
    c.control.K_id.reset();
    c.control.K_pq.reset();
    c.control.K_iq.reset();
  } else {
    throw ConfigError("parameter '" + param + "' is not sweepable");
  }
  return c;
}

std::string gains_report(const ConfigFile& config) {
  const ControlSettings s = config.control.synthesize(config.motor);
  std::ostringstream out;
  out << "beta = " << fmt("%.6g", s.speed.beta) << '\n'
      << "K_pw = " << fmt("%.6g", s.speed.K_pw) << '\n'
      << "K_iw = " << fmt("%.6g", s.speed.K_iw) << '\n'
      << "xi_a = " << fmt("%.6g", s.speed.xi_a) << '\n'
      << "a = " << fmt("%.6g", s.current.a) << '\n'
      << "K_pd = " << fmt("%.6g", s.current.K_pd) << '\n'
      << "K_id = " << fmt("%.6g", s.current.K_id) << '\n'
      << "K_pq = " << fmt("%.6g", s.current.K_pq) << '\n'
      << "K_iq = " << fmt("%.6g", s.current.K_iq) << '\n'
      << "decoupling = " << to_string(s.current.decoupling) << '\n'
      << "decoupling_sign = " << to_string(s.current.decoupling_sign) << '\n'
      << "iq_max = " << fmt("%.6g", s.iq_max) << '\n';
  return out.str();
}

std::string run_summary(const ConfigFile& config, const RunLog& log) {
  std::ostringstream out;
  out << "name = " << config.name << '\n'
      << "variant = " << to_string(config.scenario.variant) << '\n'
      << "records = " << log.records.size() << '\n'
      << "horizon_s = " << fmt("%.9g", log.horizon()) << '\n';

  const auto& speed = config.scenario.speed_schedule;
  for (std::size_t i = 0; i < speed.size(); ++i) {
    const double begin = speed[i].time;
    const double end = i + 1 < speed.size() ? speed[i + 1].time : log.horizon();
    const std::string prefix = "step" + std::to_string(i) + ".";
    out << prefix << "time_s = " << fmt("%.9g", begin) << '\n'
        << prefix << "setpoint_rpm = " << fmt("%.9g", speed[i].rpm) << '\n';
    if (end - begin < kMinStepWindow) {
      out << prefix << "skipped = window shorter than 20 ms\n";
      continue;
    }
    const StepMetrics m =
        step_metrics(log, StepWindow{begin, speed[i].rpm, {}, end});
    out << prefix << "overshoot_pct = " << fmt("%.4f", m.overshoot_pct) << '\n'
        << prefix << "settling_time_s = " << fmt("%.6f", m.settling_time_s) << '\n'
        << prefix << "settled = " << (m.settled ? "true" : "false") << '\n'
        << prefix << "steady_state_error_rpm = " << fmt("%.4f", m.steady_state_error)
        << '\n'
        << prefix << "ripple_pct = " << fmt("%.5f", m.ripple_pct) << '\n';
  }

  const auto& loads = config.scenario.load_schedule;
  for (std::size_t i = 0; i < loads.size(); ++i) {
    // Setpoint in force when the load lands.
    double setpoint = 0.0;
    for (const auto& e : speed) {
      if (e.time <= loads[i].time) setpoint = e.rpm;
    }
    const double end = i + 1 < loads.size() ? loads[i + 1].time : log.horizon();
    const DisturbanceMetrics d =
        disturbance_metrics(log, loads[i].time, setpoint, end);
    const std::string prefix = "load" + std::to_string(i) + ".";
    out << prefix << "time_s = " << fmt("%.9g", loads[i].time) << '\n'
        << prefix << "torque_nm = " << fmt("%.9g", loads[i].torque) << '\n'
        << prefix << "max_deviation_pct = " << fmt("%.4f", d.max_deviation_pct) << '\n'
        << prefix << "recovered_to_band = " << (d.recovered ? "true" : "false")
        << '\n'
        << prefix << "recovery_time_s = " << fmt("%.6f", d.recovery_time_s) << '\n';
  }

  if (config.sim.simulate_observer &&
      log.horizon() > kTrackingConvergenceWindow) {
    const TrackingMetrics t = tracking_metrics(log, kTrackingConvergenceWindow);
    out << "tracking.max_angle_error_deg = " << fmt("%.4f", t.max_angle_error_deg)
        << '\n'
        << "tracking.mean_speed_error_pct = "
        << fmt("%.4f", t.mean_speed_error_pct) << '\n'
        << "tracking.convergence_time_s = " << fmt("%.6f", t.convergence_time_s)
        << '\n';
  }
  return out.str();
}

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  Loaded l = load(opts.common, err);
  if (l.code != kOk) return l.code;
  if (opts.common.dump_effective_config) {
    out << dump_config(l.config);
    return kOk;
  }
  try {
    const RunLog log = simulate(l.config);
    const std::string summary = run_summary(l.config, log);
    std::filesystem::create_directories(opts.out);
    write_atomically(opts.out / "log.csv", log_csv(log));
    write_atomically(opts.out / "summary.txt", summary);
    out << summary;
  } catch (...) {
    return report_error(err);
  }
  return kOk;
}

int cmd_sweep(const SweepOptions& opts, std::ostream& out, std::ostream& err) {
  Loaded l = load(opts.common, err);
  if (l.code != kOk) return l.code;
  if (opts.values.empty()) {
    err << "config error: sweep needs at least one value\n";
    return kConfigParseError;
  }
  std::vector<ConfigFile> configs;
  try {
    for (double v : opts.values) {
      ConfigFile c = apply_sweep_value(l.config, opts.param, v);
      c.name = l.config.name + "_" + opts.param + "_" + fmt("%g", v);
      c.validate();
      configs.push_back(std::move(c));
    }
  } catch (...) {
    return report_error(err);
  }
  if (opts.common.dump_effective_config) {
    for (const ConfigFile& c : configs) out << dump_config(c) << '\n';
    return kOk;
  }

  std::vector<RunLog> logs(configs.size());
  try {
    std::filesystem::create_directories(opts.out);
    const std::size_t jobs = static_cast<std::size_t>(std::max(1, opts.jobs));
    for (std::size_t first = 0; first < configs.size(); first += jobs) {
      std::vector<std::future<void>> batch;
      for (std::size_t i = first; i < std::min(configs.size(), first + jobs); ++i) {
        batch.push_back(std::async(std::launch::async, [&, i] {
          logs[i] = simulate(configs[i]);
          const std::filesystem::path dir = opts.out / configs[i].name;
          std::filesystem::create_directories(dir);
          write_atomically(dir / "log.csv", log_csv(logs[i]));
          write_atomically(dir / "summary.txt", run_summary(configs[i], logs[i]));
        }));
      }
      for (auto& f : batch) f.get();
    }

    if (configs.size() >= 2) {
      std::vector<ComparisonEntry> entries;
      for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto& sched = configs[i].scenario.speed_schedule;
        const SetpointEvent step = sched.empty() ? SetpointEvent{} : sched.front();
        const double end = sched.size() > 1 ? sched[1].time : logs[i].horizon();
        entries.push_back(
            {configs[i].name, &logs[i], StepWindow{step.time, step.rpm, {}, end}});
      }
      const ComparisonReport report = compare_report(entries);
      write_atomically(opts.out / "comparison.csv", format_csv(report));
      write_atomically(opts.out / "comparison.txt", format_table(report));
      out << format_table(report);
    } else {
      out << run_summary(configs.front(), logs.front());
    }
  } catch (...) {
    return report_error(err);
  }
  return kOk;
}

int cmd_print_gains(const CommonOptions& opts, std::ostream& out,
                    std::ostream& err) {
  Loaded l = load(opts, err);
  if (l.code != kOk) return l.code;
  if (opts.dump_effective_config) {
    out << dump_config(l.config);
    return kOk;
  }
  out << gains_report(l.config);
  return kOk;
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sensorless PMSM field-oriented control simulator"};
  app.require_subcommand(1);

  auto add_common = [](CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config,-c", o.config, "Scenario/config TOML file")->required();
    cmd->add_option("--log-every", o.log_every, "Log every N integration steps")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--dump-effective-config", o.dump_effective_config,
                  "Print the fully resolved configuration as TOML and exit");
  };

  RunOptions run_opts;
  CLI::App* run_cmd = app.add_subcommand(
      "run", "Simulate one scenario; writes <out>/log.csv and <out>/summary.txt");
  add_common(run_cmd, run_opts.common);
  run_cmd->add_option("--out,-o", run_opts.out, "Output directory")
      ->default_val("out");

  SweepOptions sweep_opts;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep",
      "Run one scenario per value; writes <out>/<name>/ and "
      "<out>/comparison.{txt,csv}");
  add_common(sweep_cmd, sweep_opts.common);
  sweep_cmd->add_option("--param,-p", sweep_opts.param, "Parameter to vary")
      ->required()
      ->check(CLI::IsMember(sweepable_params()));
  sweep_cmd->add_option("--values", sweep_opts.values, "Comma-separated values")
      ->delimiter(',');
  sweep_cmd->add_option("--out,-o", sweep_opts.out, "Output directory")
      ->default_val("sweep");
  sweep_cmd->add_option("--jobs,-j", sweep_opts.jobs, "Concurrent runs")
      ->check(CLI::PositiveNumber);

  CommonOptions gains_opts;
  CLI::App* gains_cmd =
      app.add_subcommand("print-gains", "Print synthesized controller gains");
  add_common(gains_cmd, gains_opts);

  app.footer(
      "CSV columns: " + std::string(kRunLogCsvHeader) +
      "\nComparison CSV columns: label,setpoint_rpm,overshoot_pct,"
      "settling_time_s,settled,steady_state_error_rpm,ripple_pct,peak_rpm,"
      "final_rpm\nExit codes: 0 ok, 1 usage, 2 config parse error, "
      "3 invariant violation, 4 simulation fault, 5 I/O error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  if (*run_cmd) return cmd_run(run_opts, out, err);
  if (*sweep_cmd) return cmd_sweep(sweep_opts, out, err);
  return cmd_print_gains(gains_opts, out, err);
}

}  // namespace pmsm::cli
