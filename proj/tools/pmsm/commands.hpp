#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pmsm/config.hpp"

namespace pmsm::cli {

enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,
  kConfigParseError = 2,
  kInvariantViolation = 3,
  kSimulationFault = 4,
  kIoError = 5,
};

struct CommonOptions {
  std::filesystem::path config;
  std::optional<int> log_every;
  bool dump_effective_config = false;
};

struct RunOptions {
  CommonOptions common;
  std::filesystem::path out;
};

struct SweepOptions {
  CommonOptions common;
  std::string param;
  std::vector<double> values;
  std::filesystem::path out;
  int jobs = 1;
};

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepOptions& opts, std::ostream& out, std::ostream& err);
int cmd_print_gains(const CommonOptions& opts, std::ostream& out,
                    std::ostream& err);

/// Parameters accepted by `sweep --param`.
const std::vector<std::string>& sweepable_params();

/// Returns a copy of `config` with `param` set to `value`. Throws
/// ConfigError for an unknown parameter.
ConfigFile apply_sweep_value(const ConfigFile& config, const std::string& param,
                             double value);

/// Key-value report of the synthesized controller gains.
std::string gains_report(const ConfigFile& config);

/// Metrics summary of a finished run.
std::string run_summary(const ConfigFile& config, const RunLog& log);

/// Parses and dispatches argv; returns the process exit code.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace pmsm::cli
