#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "pmsm/errors.hpp"

namespace pmsm {

template <std::size_t N>
using StateVector = std::array<double, N>;

/// One fixed step of the Bogacki-Shampine third-order scheme (ode3):
///   k1 = f(y), k2 = f(y + dt/2 k1), k3 = f(y + 3dt/4 k2)
///   y+ = y + dt (2 k1 + 3 k2 + 4 k3) / 9
/// `f` maps a StateVector<N> to its derivative. Throws SimulationFault if the
/// result is not finite.
template <std::size_t N, typename Derivative>
StateVector<N> rk3_step(const StateVector<N>& y, Derivative&& f, double dt) {
  const StateVector<N> k1 = f(y);
  StateVector<N> stage;
  for (std::size_t i = 0; i < N; ++i) stage[i] = y[i] + 0.5 * dt * k1[i];
  const StateVector<N> k2 = f(stage);
  for (std::size_t i = 0; i < N; ++i) stage[i] = y[i] + 0.75 * dt * k2[i];
  const StateVector<N> k3 = f(stage);

  StateVector<N> next;
  for (std::size_t i = 0; i < N; ++i) {
    next[i] = y[i] + dt * (2.0 * k1[i] + 3.0 * k2[i] + 4.0 * k3[i]) / 9.0;
    if (!std::isfinite(next[i])) {
      throw SimulationFault("rk3_step produced a non-finite state");
    }
  }
  return next;
}

}  // namespace pmsm
