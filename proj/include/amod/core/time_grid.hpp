#pragma once

#include <cmath>
#include <cstdint>

#include "amod/core/errors.hpp"

namespace amod {

// Planning steps are 1-based: step 1 covers wall time [0, delta_t).
using Step = int;

struct TimeGrid {
  double delta_t_s = 300.0;  // length of one planning interval
  int horizon = 1;           // number of planning intervals T
  double tick_s = 6.0;       // simulator tick

  // Ticks per planning interval; requires tick_s to divide delta_t_s.
  int ticks_per_interval() const {
    return static_cast<int>(std::llround(delta_t_s / tick_s));
  }

  bool valid() const {
    if (!(delta_t_s > 0.0) || horizon < 1 || !(tick_s > 0.0)) return false;
    const double ratio = delta_t_s / tick_s;
    return std::abs(ratio - std::round(ratio)) < 1e-9 && std::round(ratio) >= 1.0;
  }
};

// Maps a wall-clock offset to its 1-based planning step. Times past the
// horizon collapse onto the sentinel step horizon + 1.
inline Step quantize(double wall_time_s, const TimeGrid& grid) {
  if (wall_time_s < 0.0 || std::isnan(wall_time_s)) {
    throw InputError("quantize: negative wall time");
  }
  const double index = std::floor(wall_time_s / grid.delta_t_s);
  if (index >= static_cast<double>(grid.horizon)) return grid.horizon + 1;
  return static_cast<Step>(index) + 1;
}

// Number of whole intervals a movement of the given duration occupies.
// Never below one: a vehicle cannot arrive in the interval it left.
inline int travel_steps(double seconds, const TimeGrid& grid) {
  if (!(seconds > 0.0)) return 1;
  const double steps = std::ceil(seconds / grid.delta_t_s);
  return steps < 1.0 ? 1 : static_cast<int>(steps);
}

// Same rounding rule at simulator tick resolution.
inline int travel_ticks(double seconds, double tick_s) {
  if (!(seconds > 0.0)) return 1;
  const double ticks = std::ceil(seconds / tick_s);
  return ticks < 1.0 ? 1 : static_cast<int>(ticks);
}

}  // namespace amod
