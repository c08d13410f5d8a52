#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "amod/core/errors.hpp"
#include "amod/core/scenario.hpp"
#include "amod/core/trips.hpp"
#include "amod/io/csv.hpp"

namespace amod::io {

inline constexpr const char* kTripHeader = "request_time,origin,destination,duration_s";

// Rows with regions outside the set are dropped and counted.
inline TripLog read_trips(std::istream& in, const RegionSet& regions, const std::string& source = "trips") {
  expect_header(in, kTripHeader, source);
  TripLog log;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto ctx = where(source, line_no);
    const auto f = split_csv(line);
    if (f.size() != 4) throw InputError(ctx + ": expected 4 fields");
    const auto request = parse_int(f[0], ctx);
    if (request < 0) throw InputError(ctx + ": negative request time");
    const double duration = parse_double(f[3], ctx);
    if (!(duration > 0.0)) throw InputError(ctx + ": duration must be positive");
    const auto origin = regions.index_of(std::string(f[1]));
    const auto destination = regions.index_of(std::string(f[2]));
    if (!origin || !destination) {
      ++log.dropped;
      continue;
    }
    log.trips.push_back(Trip{static_cast<double>(request), *origin, *destination, duration});
  }
  log.sort();
  return log;
}

inline TripLog load_trips(const std::string& path, const RegionSet& regions) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open trip log " + path);
  return read_trips(in, regions, path);
}

// Region ids in order of first appearance, for logs without a region list.
inline RegionSet regions_in_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open trip log " + path);
  expect_header(in, kTripHeader, path);
  std::vector<std::string> ids;
  std::unordered_map<std::string, bool> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (blank(line)) continue;
    const auto f = split_csv(line);
    if (f.size() != 4) continue;
    for (int k = 1; k <= 2; ++k) {
      std::string id(f[static_cast<std::size_t>(k)]);
      if (seen.emplace(id, true).second) ids.push_back(id);
    }
  }
  return RegionSet(std::move(ids));
}

inline void write_trips(std::ostream& os, const TripLog& log, const RegionSet& regions) {
  os << kTripHeader << '\n';
  for (const auto& t : log.trips) {
    os << static_cast<long long>(std::llround(t.request_time)) << ',' << regions.id(t.origin) << ','
       << regions.id(t.destination) << ',' << std::setprecision(17) << t.duration_s << '\n';
  }
}

inline void save_trips(const std::string& path, const TripLog& log, const RegionSet& regions) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write trip log " + path);
  write_trips(out, log, regions);
}

struct TravelEstimate {
  TravelTimeMatrix matrix;
  int observed_pairs = 0;
  int composed_pairs = 0;   // filled by shortest paths over observed pairs
  int filled_pairs = 0;     // filled with the global mean
};

// tau from mean observed durations; gaps filled by path composition, then
// by the global mean duration.
inline TravelEstimate build_travel_matrix(const TripLog& log, int regions, const TimeGrid& grid) {
  if (log.trips.empty()) throw InputError("build_travel_matrix: empty trip log");
  const auto n = static_cast<std::size_t>(regions);
  std::vector<double> sum(n * n, 0.0);
  std::vector<long long> count(n * n, 0);
  double total = 0.0;
  for (const auto& t : log.trips) {
    const auto k = static_cast<std::size_t>(t.origin) * n + static_cast<std::size_t>(t.destination);
    sum[k] += t.duration_s;
    ++count[k];
    total += t.duration_s;
  }
  const double global_mean = total / static_cast<double>(log.trips.size());

  constexpr int kNone = std::numeric_limits<int>::max() / 4;
  std::vector<int> steps(n * n, kNone);
  std::vector<double> seconds(n * n, 0.0);
  TravelEstimate est;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto k = i * n + j;
      if (i == j) {
        steps[k] = 1;
        seconds[k] = count[k] > 0 ? sum[k] / static_cast<double>(count[k]) : grid.delta_t_s;
      } else if (count[k] > 0) {
        seconds[k] = sum[k] / static_cast<double>(count[k]);
        steps[k] = travel_steps(seconds[k], grid);
        ++est.observed_pairs;
      }
    }
  }
  // Composition over observed pairs only; the diagonal does not chain.
  std::vector<int> dist = steps;
  std::vector<double> dsec = seconds;
  for (std::size_t i = 0; i < n; ++i) {
    dist[i * n + i] = 0;
    dsec[i * n + i] = 0.0;
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (dist[i * n + k] >= kNone) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (dist[k * n + j] >= kNone) continue;
        const int via = dist[i * n + k] + dist[k * n + j];
        if (via < dist[i * n + j]) {
          dist[i * n + j] = via;
          dsec[i * n + j] = dsec[i * n + k] + dsec[k * n + j];
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto k = i * n + j;
      if (i == j || steps[k] < kNone) continue;
      if (dist[k] < kNone) {
        steps[k] = dist[k];
        seconds[k] = dsec[k];
        ++est.composed_pairs;
      } else {
        steps[k] = travel_steps(global_mean, grid);
        seconds[k] = global_mean;
        ++est.filled_pairs;
      }
    }
  }
  est.matrix = TravelTimeMatrix(regions, std::move(steps), std::move(seconds));
  return est;
}

}  // namespace amod::io
