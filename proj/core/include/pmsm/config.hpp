#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "pmsm/control.hpp"
#include "pmsm/engine.hpp"
#include "pmsm/observer.hpp"
#include "pmsm/plant.hpp"

namespace pmsm {

/// Controller synthesis inputs. Gains left unset are designed from the
/// motor parameters; explicitly set gains override the design.
struct ControlConfig {
  double beta = 500.0;
  bool active_damping = false;
  std::optional<double> a;
  Decoupling decoupling = Decoupling::none;
  DecouplingSign decoupling_sign = DecouplingSign::printed;
  std::optional<double> K_pw;
  std::optional<double> K_iw;
  std::optional<double> xi_a;
  std::optional<double> K_pd;
  std::optional<double> K_id;
  std::optional<double> K_pq;
  std::optional<double> K_iq;
  double iq_max = 4.5;
  double open_loop_boost = 3.0;

  ControlSettings synthesize(const MotorParams& p) const;
  bool operator==(const ControlConfig&) const = default;
};

struct ConfigFile {
  std::string name;
  MotorParams motor;
  SimConfig sim;
  ControlConfig control;
  SmoParams smo;
  Scenario scenario;

  /// Throws InvariantError on the first violated parameter constraint.
  void validate() const;
  bool operator==(const ConfigFile&) const = default;
};

/// Built-in fallbacks used for keys a config file leaves out.
ConfigFile default_config();

/// Parses TOML text. A top-level `base = "path"` entry names another config
/// (relative to `base_dir`) whose keys this text overrides. Unknown keys and
/// malformed values throw ConfigError; the result is not validated.
ConfigFile parse_config(std::string_view text,
                        const std::filesystem::path& base_dir = {},
                        std::string_view source_name = "<string>");

ConfigFile load_config(const std::filesystem::path& path);

/// Effective configuration as self-contained TOML; parse_config on the
/// result reproduces `config` exactly.
std::string dump_config(const ConfigFile& config);

ControllerVariant parse_variant(std::string_view s);
Decoupling parse_decoupling(std::string_view s);
DecouplingSign parse_decoupling_sign(std::string_view s);
SwitchingFunction parse_switching(std::string_view s);

}  // namespace pmsm
