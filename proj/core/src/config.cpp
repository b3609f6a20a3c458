#include "pmsm/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include <toml.hpp>

#include "pmsm/errors.hpp"

namespace pmsm {

namespace {

constexpr int kMaxBaseDepth = 8;

[[noreturn]] void fail(const std::string& what) { throw ConfigError(what); }

double read_double(const toml::node& node, const std::string& key) {
  if (auto v = node.value<double>(); v && (node.is_floating_point() || node.is_integer())) {
    return *v;
  }
  fail("'" + key + "' must be a number");
}

bool read_bool(const toml::node& node, const std::string& key) {
  if (auto v = node.value<bool>(); v && node.is_boolean()) return *v;
  fail("'" + key + "' must be a boolean");
}

std::int64_t read_int(const toml::node& node, const std::string& key) {
  if (node.is_integer()) return *node.value<std::int64_t>();
  fail("'" + key + "' must be an integer");
}

std::string read_string(const toml::node& node, const std::string& key) {
  if (node.is_string()) return *node.value<std::string>();
  fail("'" + key + "' must be a string");
}

std::vector<std::pair<double, double>> read_pairs(const toml::node& node,
                                                  const std::string& key) {
  const toml::array* arr = node.as_array();
  if (arr == nullptr) fail("'" + key + "' must be an array of [time, value] pairs");
  std::vector<std::pair<double, double>> out;
  for (const toml::node& item : *arr) {
    const toml::array* pair = item.as_array();
    if (pair == nullptr || pair->size() != 2) {
      fail("'" + key + "' entries must be [time, value] pairs");
    }
    out.emplace_back(read_double(*pair->get(0), key), read_double(*pair->get(1), key));
  }
  return out;
}

// Child entries replace parent entries; nested tables merge recursively.
void merge_into(toml::table& parent, const toml::table& child) {
  for (auto&& [key, node] : child) {
    if (const toml::table* child_table = node.as_table()) {
      if (toml::table* parent_table = parent.get_as<toml::table>(key)) {
        merge_into(*parent_table, *child_table);
        continue;
      }
    }
    parent.insert_or_assign(key, node);
  }
}

toml::table parse_table(std::string_view text, std::string_view source_name) {
  try {
    return toml::parse(text, source_name);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "parse error in " << source_name << ": " << e.description() << " ("
        << e.source().begin << ")";
    fail(msg.str());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

toml::table resolve_bases(toml::table table, const std::filesystem::path& base_dir,
                          int depth) {
  const toml::node* base = table.get("base");
  if (base == nullptr) return table;
  if (depth >= kMaxBaseDepth) fail("config 'base' chain too deep");
  const std::filesystem::path base_path = base_dir / read_string(*base, "base");
  toml::table parent = resolve_bases(
      parse_table(read_file(base_path), base_path.string()),
      base_path.parent_path(), depth + 1);
  table.erase("base");
  merge_into(parent, table);
  return parent;
}

using Setter = std::function<void(const toml::node&, ConfigFile&)>;

struct Section {
  std::map<std::string, Setter, std::less<>> keys;
};

void apply_section(const toml::table& table, const Section& section,
                   const std::string& prefix, ConfigFile& cfg) {
  for (auto&& [key, node] : table) {
    const std::string name(key.str());
    auto it = section.keys.find(name);
    if (it == section.keys.end()) fail("unknown key '" + prefix + name + "'");
    it->second(node, cfg);
  }
}

#define PMSM_DOUBLE(path, field)                                   \
  {#field, [](const toml::node& n, ConfigFile& c) {                \
     c.path.field = read_double(n, #path "." #field);              \
   }}
#define PMSM_OPT_DOUBLE(path, field) PMSM_DOUBLE(path, field)

Section motor_section() {
  return {{
      PMSM_DOUBLE(motor, R),
      PMSM_DOUBLE(motor, Ld),
      PMSM_DOUBLE(motor, Lq),
      PMSM_DOUBLE(motor, psi_f),
      PMSM_DOUBLE(motor, J),
      PMSM_DOUBLE(motor, xi),
      PMSM_DOUBLE(motor, u_max),
      {"pn", [](const toml::node& n, ConfigFile& c) {
         c.motor.pn = static_cast<int>(read_int(n, "motor.pn"));
       }},
  }};
}

Section sim_section() {
  return {{
      PMSM_DOUBLE(sim, dt),
      PMSM_DOUBLE(sim, t_end),
      PMSM_OPT_DOUBLE(sim, controller_dt),
      {"log_every", [](const toml::node& n, ConfigFile& c) {
         c.sim.log_every = static_cast<int>(read_int(n, "sim.log_every"));
       }},
      {"seed", [](const toml::node& n, ConfigFile& c) {
         const auto v = read_int(n, "sim.seed");
         if (v < 0) fail("'sim.seed' must be non-negative");
         c.sim.seed = static_cast<std::uint64_t>(v);
       }},
      {"simulate_observer", [](const toml::node& n, ConfigFile& c) {
         c.sim.simulate_observer = read_bool(n, "sim.simulate_observer");
       }},
  }};
}

Section control_section() {
  return {{
      PMSM_DOUBLE(control, beta),
      PMSM_OPT_DOUBLE(control, a),
      PMSM_OPT_DOUBLE(control, K_pw),
      PMSM_OPT_DOUBLE(control, K_iw),
      PMSM_OPT_DOUBLE(control, xi_a),
      PMSM_OPT_DOUBLE(control, K_pd),
      PMSM_OPT_DOUBLE(control, K_id),
      PMSM_OPT_DOUBLE(control, K_pq),
      PMSM_OPT_DOUBLE(control, K_iq),
      PMSM_DOUBLE(control, iq_max),
      PMSM_DOUBLE(control, open_loop_boost),
      {"active_damping", [](const toml::node& n, ConfigFile& c) {
         c.control.active_damping = read_bool(n, "control.active_damping");
       }},
      {"decoupling", [](const toml::node& n, ConfigFile& c) {
         c.control.decoupling = parse_decoupling(read_string(n, "control.decoupling"));
       }},
      {"decoupling_sign", [](const toml::node& n, ConfigFile& c) {
         c.control.decoupling_sign =
             parse_decoupling_sign(read_string(n, "control.decoupling_sign"));
       }},
  }};
}

Section smo_section() {
  return {{
      PMSM_DOUBLE(smo, k),
      PMSM_DOUBLE(smo, tau0),
      PMSM_DOUBLE(smo, omega_c),
      PMSM_DOUBLE(smo, boundary_width),
      PMSM_DOUBLE(smo, emf_epsilon),
      PMSM_DOUBLE(smo, direction_window),
      PMSM_DOUBLE(smo, direction_emf_floor),
      PMSM_DOUBLE(smo, direction_min_rotation),
      {"switching", [](const toml::node& n, ConfigFile& c) {
         c.smo.switching = parse_switching(read_string(n, "smo.switching"));
       }},
  }};
}

Section initial_section() {
  return {{
      PMSM_DOUBLE(scenario.initial_state, i_d),
      PMSM_DOUBLE(scenario.initial_state, i_q),
      PMSM_DOUBLE(scenario.initial_state, omega_m),
      PMSM_DOUBLE(scenario.initial_state, theta_e),
  }};
}

#undef PMSM_DOUBLE
#undef PMSM_OPT_DOUBLE

void apply_scenario(const toml::table& table, ConfigFile& cfg) {
  for (auto&& [key, node] : table) {
    const std::string name(key.str());
    if (name == "variant") {
      cfg.scenario.variant = parse_variant(read_string(node, "scenario.variant"));
    } else if (name == "speed_schedule") {
      cfg.scenario.speed_schedule.clear();
      for (auto [t, v] : read_pairs(node, "scenario.speed_schedule")) {
        cfg.scenario.speed_schedule.push_back({t, v});
      }
    } else if (name == "load_schedule") {
      cfg.scenario.load_schedule.clear();
      for (auto [t, v] : read_pairs(node, "scenario.load_schedule")) {
        cfg.scenario.load_schedule.push_back({t, v});
      }
    } else if (name == "initial") {
      const toml::table* sub = node.as_table();
      if (sub == nullptr) fail("'scenario.initial' must be a table");
      apply_section(*sub, initial_section(), "scenario.initial.", cfg);
    } else {
      fail("unknown key 'scenario." + name + "'");
    }
  }
}

template <typename T>
void put_optional(toml::table& t, std::string_view key, const std::optional<T>& v) {
  if (v) t.insert_or_assign(key, *v);
}

toml::array pairs_to_array(const std::vector<std::pair<double, double>>& pairs) {
  toml::array arr;
  for (auto [a, b] : pairs) arr.push_back(toml::array{a, b});
  return arr;
}

}  // namespace

ControlSettings ControlConfig::synthesize(const MotorParams& p) const {
  ControlSettings s;
  s.speed = design_speed_loop(p, beta, active_damping);
  if (K_pw) s.speed.K_pw = *K_pw;
  if (K_iw) s.speed.K_iw = *K_iw;
  if (xi_a) s.speed.xi_a = *xi_a;
  s.current = design_current_loop(p, a, decoupling);
  s.current.decoupling_sign = decoupling_sign;
  if (K_pd) s.current.K_pd = *K_pd;
  if (K_id) s.current.K_id = *K_id;
  if (K_pq) s.current.K_pq = *K_pq;
  if (K_iq) s.current.K_iq = *K_iq;
  s.iq_max = iq_max;
  s.open_loop_boost = open_loop_boost;
  return s;
}

void ConfigFile::validate() const {
  motor.validate();
  sim.validate();
  smo.validate();
  scenario.validate(sim.t_end);
  control.synthesize(motor).validate();
}

ConfigFile default_config() {
  ConfigFile c;
  c.name = "default";
  // 60ST-M00630 nameplate; R and L are half the line-to-line values.
  c.motor.R = 5.8;
  c.motor.Ld = 0.011;
  c.motor.Lq = 0.011;
  c.motor.psi_f = 0.3477;
  c.motor.J = 0.17e-4;
  c.motor.xi = 0.015;
  c.motor.pn = 4;
  c.motor.u_max = 311.0;

  c.sim.dt = 2e-7;
  c.sim.t_end = 0.1;
  c.sim.log_every = 10;

  c.smo.k = 145.0;
  c.smo.tau0 = 1.0 / 30000.0;
  c.smo.omega_c = 30000.0;
  c.smo.switching = SwitchingFunction::sign;
  c.smo.emf_epsilon = 2.0;

  c.scenario.variant = ControllerVariant::smo_sensorless;
  c.scenario.speed_schedule = {{0.0, 1000.0}};
  return c;
}

ConfigFile parse_config(std::string_view text, const std::filesystem::path& base_dir,
                        std::string_view source_name) {
  const toml::table table =
      resolve_bases(parse_table(text, source_name), base_dir, 0);

  ConfigFile cfg = default_config();
  bool omega_c_given = false;
  for (auto&& [key, node] : table) {
    const std::string name(key.str());
    if (name == "name") {
      cfg.name = read_string(node, "name");
      continue;
    }
    const toml::table* sub = node.as_table();
    if (name == "motor" || name == "sim" || name == "control" || name == "smo" ||
        name == "scenario") {
      if (sub == nullptr) fail("'" + name + "' must be a table");
    }
    if (name == "motor") {
      apply_section(*sub, motor_section(), "motor.", cfg);
    } else if (name == "sim") {
      apply_section(*sub, sim_section(), "sim.", cfg);
    } else if (name == "control") {
      apply_section(*sub, control_section(), "control.", cfg);
    } else if (name == "smo") {
      apply_section(*sub, smo_section(), "smo.", cfg);
      omega_c_given = sub->contains("omega_c");
    } else if (name == "scenario") {
      apply_scenario(*sub, cfg);
    } else {
      fail("unknown key '" + name + "'");
    }
  }
  // The compensation cutoff follows the filter unless set explicitly.
  if (!omega_c_given && cfg.smo.tau0 > 0.0) cfg.smo.omega_c = 1.0 / cfg.smo.tau0;
  return cfg;
}

ConfigFile load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.parent_path(), path.string());
}

std::string dump_config(const ConfigFile& c) {
  toml::table motor{{"R", c.motor.R},       {"Ld", c.motor.Ld},
                    {"Lq", c.motor.Lq},     {"psi_f", c.motor.psi_f},
                    {"J", c.motor.J},       {"xi", c.motor.xi},
                    {"pn", c.motor.pn},     {"u_max", c.motor.u_max}};

  toml::table sim{{"dt", c.sim.dt},
                  {"t_end", c.sim.t_end},
                  {"log_every", c.sim.log_every},
                  {"simulate_observer", c.sim.simulate_observer}};
  put_optional(sim, "controller_dt", c.sim.controller_dt);
  if (c.sim.seed) sim.insert_or_assign("seed", static_cast<std::int64_t>(*c.sim.seed));

  const ControlConfig& k = c.control;
  toml::table control{{"beta", k.beta},
                      {"active_damping", k.active_damping},
                      {"decoupling", std::string(to_string(k.decoupling))},
                      {"decoupling_sign", std::string(to_string(k.decoupling_sign))},
                      {"iq_max", k.iq_max},
                      {"open_loop_boost", k.open_loop_boost}};
  put_optional(control, "a", k.a);
  put_optional(control, "K_pw", k.K_pw);
  put_optional(control, "K_iw", k.K_iw);
  put_optional(control, "xi_a", k.xi_a);
  put_optional(control, "K_pd", k.K_pd);
  put_optional(control, "K_id", k.K_id);
  put_optional(control, "K_pq", k.K_pq);
  put_optional(control, "K_iq", k.K_iq);

  toml::table smo{{"k", c.smo.k},
                  {"tau0", c.smo.tau0},
                  {"omega_c", c.smo.omega_c},
                  {"switching", std::string(to_string(c.smo.switching))},
                  {"boundary_width", c.smo.boundary_width},
                  {"emf_epsilon", c.smo.emf_epsilon},
                  {"direction_window", c.smo.direction_window},
                  {"direction_emf_floor", c.smo.direction_emf_floor},
                  {"direction_min_rotation", c.smo.direction_min_rotation}};

  std::vector<std::pair<double, double>> speed;
  for (const auto& e : c.scenario.speed_schedule) speed.emplace_back(e.time, e.rpm);
  std::vector<std::pair<double, double>> load;
  for (const auto& e : c.scenario.load_schedule) load.emplace_back(e.time, e.torque);
  const PlantState& s0 = c.scenario.initial_state;
  toml::table scenario{
      {"variant", std::string(to_string(c.scenario.variant))},
      {"speed_schedule", pairs_to_array(speed)},
      {"load_schedule", pairs_to_array(load)},
      {"initial", toml::table{{"i_d", s0.i_d},
                              {"i_q", s0.i_q},
                              {"omega_m", s0.omega_m},
                              {"theta_e", s0.theta_e}}}};

  toml::table root{{"name", c.name},     {"motor", motor}, {"sim", sim},
                   {"control", control}, {"smo", smo},     {"scenario", scenario}};
  std::ostringstream out;
  out << root << '\n';
  return out.str();
}

ControllerVariant parse_variant(std::string_view s) {
  if (s == "smo_sensorless") return ControllerVariant::smo_sensorless;
  if (s == "pi_sensored") return ControllerVariant::pi_sensored;
  if (s == "open_loop") return ControllerVariant::open_loop;
  fail("unknown controller variant '" + std::string(s) + "'");
}

Decoupling parse_decoupling(std::string_view s) {
  if (s == "none") return Decoupling::none;
  if (s == "feedforward") return Decoupling::feedforward;
  fail("unknown decoupling '" + std::string(s) + "'");
}

DecouplingSign parse_decoupling_sign(std::string_view s) {
  if (s == "printed") return DecouplingSign::printed;
  if (s == "cancelling") return DecouplingSign::cancelling;
  fail("unknown decoupling_sign '" + std::string(s) + "'");
}

SwitchingFunction parse_switching(std::string_view s) {
  if (s == "sign") return SwitchingFunction::sign;
  if (s == "saturation") return SwitchingFunction::saturation;
  fail("unknown switching function '" + std::string(s) + "'");
}

}  // namespace pmsm
