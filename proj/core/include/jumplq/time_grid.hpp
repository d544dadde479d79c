#pragma once

#include <cstddef>
#include <stdexcept>

namespace jumplq {

/// Uniform grid t_k = k T / steps on [0, T].
struct TimeGrid {
  std::size_t steps = 1;
  double T = 1.0;

  TimeGrid() = default;
  TimeGrid(std::size_t steps_, double horizon) : steps(steps_), T(horizon) {
    if (steps_ < 1 || !(horizon > 0.0)) throw std::invalid_argument("TimeGrid: bad steps or T");
  }

  std::size_t nodes() const noexcept { return steps + 1; }
  double dt() const noexcept { return T / static_cast<double>(steps); }
  double node(std::size_t k) const noexcept {
    return k >= steps ? T : static_cast<double>(k) * T / static_cast<double>(steps);
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

}  // namespace jumplq
