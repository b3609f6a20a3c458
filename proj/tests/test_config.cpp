#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "pmsm/config.hpp"
#include "pmsm/errors.hpp"
#include "support.hpp"

namespace pmsm {
namespace {

namespace fs = std::filesystem;

TEST(ParseConfig, EmptyTextGivesDefaults) {
  EXPECT_TRUE(parse_config("") == default_config());
}

TEST(ParseConfig, DefaultsMatchMotorPreset) {
  const ConfigFile preset = load_config(test::preset_path("tbl1-motor.toml"));
  EXPECT_TRUE(preset.motor == default_config().motor);
  EXPECT_TRUE(preset.motor == test::tbl1_motor());
}

TEST(ParseConfig, OverridesAndSchedules) {
  const ConfigFile c = parse_config(R"(
name = "custom"
[motor]
R = 2.5
pn = 2
[sim]
dt = 1e-6
t_end = 0.05
controller_dt = 1e-5
seed = 42
[control]
a = 1000.0
decoupling = "feedforward"
decoupling_sign = "cancelling"
K_pw = 0.01
[smo]
k = 200.0
tau0 = 1e-4
switching = "saturation"
[scenario]
variant = "pi_sensored"
speed_schedule = [[0.0, 500.0], [0.02, 700]]
load_schedule = [[0.01, 0.2]]
[scenario.initial]
omega_m = 10.0
)");
  EXPECT_EQ(c.name, "custom");
  EXPECT_EQ(c.motor.R, 2.5);
  EXPECT_EQ(c.motor.pn, 2);
  EXPECT_EQ(c.motor.Ld, 0.011);
  EXPECT_EQ(c.sim.dt, 1e-6);
  EXPECT_EQ(c.sim.controller_dt, 1e-5);
  EXPECT_EQ(c.sim.seed, 42u);
  EXPECT_EQ(c.control.a, 1000.0);
  EXPECT_EQ(c.control.decoupling, Decoupling::feedforward);
  EXPECT_EQ(c.control.decoupling_sign, DecouplingSign::cancelling);
  EXPECT_EQ(c.control.K_pw, 0.01);
  EXPECT_FALSE(c.control.K_iw.has_value());
  EXPECT_EQ(c.smo.k, 200.0);
  EXPECT_EQ(c.smo.switching, SwitchingFunction::saturation);
  EXPECT_DOUBLE_EQ(c.smo.omega_c, 1e4);  // follows tau0 when not given
  EXPECT_EQ(c.scenario.variant, ControllerVariant::pi_sensored);
  ASSERT_EQ(c.scenario.speed_schedule.size(), 2u);
  EXPECT_EQ(c.scenario.speed_schedule[1].rpm, 700.0);
  ASSERT_EQ(c.scenario.load_schedule.size(), 1u);
  EXPECT_EQ(c.scenario.load_schedule[0].torque, 0.2);
  EXPECT_EQ(c.scenario.initial_state.omega_m, 10.0);
  EXPECT_NO_THROW(c.validate());
}

TEST(ParseConfig, RejectsUnknownKeys) {
  EXPECT_THROW(parse_config("[motor]\nresistance = 1.0\n"), ConfigError);
  EXPECT_THROW(parse_config("bogus = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[extra]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[scenario]\nfoo = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[scenario.initial]\nspeed = 1\n"), ConfigError);
}

TEST(ParseConfig, RejectsMalformedValues) {
  EXPECT_THROW(parse_config("[motor]\nR = \"five\"\n"), ConfigError);
  EXPECT_THROW(parse_config("[motor]\npn = 2.5\n"), ConfigError);
  EXPECT_THROW(parse_config("[scenario]\nvariant = \"fast\"\n"), ConfigError);
  EXPECT_THROW(parse_config("[scenario]\nspeed_schedule = [[0.0]]\n"),
               ConfigError);
  EXPECT_THROW(parse_config("[control]\ndecoupling = \"maybe\"\n"), ConfigError);
  EXPECT_THROW(parse_config("[smo]\nswitching = \"tanh\"\n"), ConfigError);
  EXPECT_THROW(parse_config("[motor\nR = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("motor = 3\n"), ConfigError);
}

TEST(ConfigFile, ValidateRejectsNonPositiveStep) {
  ConfigFile c = parse_config("[sim]\ndt = 0.0\n");
  EXPECT_THROW(c.validate(), InvariantError);
  c = parse_config("[sim]\ndt = -2e-7\n");
  EXPECT_THROW(c.validate(), InvariantError);
}

TEST(ConfigFile, ValidateRejectsUnsortedSchedule) {
  const ConfigFile c =
      parse_config("[scenario]\nspeed_schedule = [[0.05, 1.0], [0.01, 2.0]]\n");
  EXPECT_THROW(c.validate(), InvariantError);
}

TEST(Synthesize, DesignedAndOverriddenGains) {
  const ConfigFile designed = load_config(test::preset_path("designed.toml"));
  const ControlSettings d = designed.control.synthesize(designed.motor);
  EXPECT_NEAR(d.speed.K_pw, 0.0040744, 1e-7);
  EXPECT_NEAR(d.speed.K_iw, 2.0372, 1e-4);
  EXPECT_NEAR(d.current.a, 3312.9, 0.1);

  const ConfigFile tuned = load_config(test::preset_path("paper-tuned.toml"));
  const ControlSettings t = tuned.control.synthesize(tuned.motor);
  EXPECT_EQ(t.speed.K_pw, 0.004);
  EXPECT_EQ(t.speed.K_iw, 2.0);
  EXPECT_EQ(t.current.K_pd, 120.54);
  EXPECT_EQ(t.current.K_pq, 120.54);
  EXPECT_EQ(t.current.K_id, 70440.0);
  EXPECT_EQ(t.current.K_iq, 70440.0);
}

TEST(DumpConfig, RoundTripIsExact) {
  for (const char* file : {"fig5a.toml", "fig5b.toml", "fig5c.toml",
                           "fig6.toml", "fig7.toml", "fig11.toml"}) {
    const ConfigFile c = load_config(test::scenario_path(file));
    const ConfigFile back = parse_config(dump_config(c));
    EXPECT_TRUE(back == c) << file;
  }
  ConfigFile odd = default_config();
  odd.sim.dt = 1.0 / 3.0 * 1e-6;
  odd.sim.controller_dt = 7e-6;
  odd.sim.seed = 9;
  odd.control.a = 1234.5678901234567;
  odd.control.decoupling = Decoupling::feedforward;
  odd.smo.switching = SwitchingFunction::saturation;
  odd.scenario.initial_state.theta_e = -0.1;
  EXPECT_TRUE(parse_config(dump_config(odd)) == odd);
}

TEST(LoadConfig, BaseChainAndErrors) {
  const fs::path dir = fs::temp_directory_path() / "pmsm_config_test";
  fs::create_directories(dir / "sub");
  std::ofstream(dir / "root.toml") << "[motor]\nR = 3.0\nJ = 1e-4\n";
  std::ofstream(dir / "sub" / "mid.toml")
      << "base = \"../root.toml\"\n[motor]\nJ = 2e-4\n";
  std::ofstream(dir / "leaf.toml") << "base = \"sub/mid.toml\"\n[sim]\nt_end = 0.05\n";
  std::ofstream(dir / "loop.toml") << "base = \"loop.toml\"\n";

  const ConfigFile c = load_config(dir / "leaf.toml");
  EXPECT_EQ(c.motor.R, 3.0);
  EXPECT_EQ(c.motor.J, 2e-4);
  EXPECT_EQ(c.sim.t_end, 0.05);

  EXPECT_THROW(load_config(dir / "loop.toml"), ConfigError);
  EXPECT_THROW(load_config(dir / "missing.toml"), ConfigError);
  fs::remove_all(dir);
}

TEST(BundledScenarios, LoadAndValidate) {
  for (const char* file : {"fig5a.toml", "fig5b.toml", "fig5c.toml",
                           "fig6.toml", "fig7.toml", "fig11.toml"}) {
    const ConfigFile c = load_config(test::scenario_path(file));
    EXPECT_NO_THROW(c.validate()) << file;
    EXPECT_EQ(c.smo.k, 145.0) << file;
  }
  const ConfigFile fig7 = load_config(test::scenario_path("fig7.toml"));
  ASSERT_EQ(fig7.scenario.speed_schedule.size(), 3u);
  EXPECT_EQ(fig7.scenario.speed_schedule[1].time, 0.06);
  EXPECT_EQ(fig7.scenario.speed_schedule[2].rpm, 1000.0);
  const ConfigFile fig11 = load_config(test::scenario_path("fig11.toml"));
  ASSERT_EQ(fig11.scenario.load_schedule.size(), 1u);
  EXPECT_EQ(fig11.scenario.load_schedule[0].torque, 0.637);
}

}  // namespace
}  // namespace pmsm
