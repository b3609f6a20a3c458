#pragma once

#include <string>

#include "pmsm/config.hpp"
#include "pmsm/plant.hpp"

namespace pmsm::test {

inline MotorParams tbl1_motor() {
  MotorParams p;
  p.R = 5.8;
  p.Ld = 0.011;
  p.Lq = 0.011;
  p.psi_f = 0.3477;
  p.J = 0.17e-4;
  p.xi = 0.015;
  p.pn = 4;
  p.u_max = 311.0;
  return p;
}

inline std::string scenario_path(const std::string& file) {
  return std::string(PMSM_SCENARIO_DIR) + "/" + file;
}

inline std::string preset_path(const std::string& file) {
  return std::string(PMSM_PRESET_DIR) + "/" + file;
}

}  // namespace pmsm::test
