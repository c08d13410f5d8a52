#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "amod/core/scenario.hpp"
#include "amod/core/time_grid.hpp"

namespace amod {

struct Trip {
  double request_time = 0.0;  // seconds from the start of the day
  int origin = 0;
  int destination = 0;
  double duration_s = 0.0;

  friend bool operator==(const Trip&, const Trip&) = default;
};

struct TripLog {
  std::vector<Trip> trips;  // sorted by request time
  std::size_t dropped = 0;  // rows skipped on load (unknown regions)

  void sort() {
    std::stable_sort(trips.begin(), trips.end(), [](const Trip& a, const Trip& b) {
      if (a.request_time != b.request_time) return a.request_time < b.request_time;
      if (a.origin != b.origin) return a.origin < b.origin;
      return a.destination < b.destination;
    });
  }
};

// Per-step counts of the requests that fall inside the grid horizon.
inline DemandSet demand_from_trips(const TripLog& log, const TimeGrid& grid) {
  DemandSet demand;
  for (const auto& trip : log.trips) {
    const Step t = quantize(trip.request_time, grid);
    if (t <= grid.horizon) demand.add(trip.origin, trip.destination, t);
  }
  return demand;
}

}  // namespace amod
