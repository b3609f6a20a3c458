#pragma once

#include <stdexcept>
#include <string>

namespace pmsm {

/// Malformed or unreadable configuration input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration that parsed but violates a parameter invariant.
class InvariantError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The integrated state left the finite domain.
class SimulationFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pmsm
