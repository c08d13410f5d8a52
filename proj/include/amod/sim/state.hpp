#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "amod/core/scenario.hpp"
#include "amod/mpc/mpc.hpp"

namespace amod::sim {

using Tick = std::int64_t;

struct Vehicle {
  enum class Status : std::uint8_t { kIdle, kServing, kRebalancing };
  int id = 0;
  Status status = Status::kIdle;
  int region = 0;        // current region when idle, destination when moving
  Tick arrival_tick = 0; // meaningful while moving
  int customer = -1;     // while serving
};

struct CustomerRequest {
  int id = 0;
  Tick request_tick = 0;
  int origin = 0;
  int destination = 0;
  Tick trip_ticks = 1;
  Tick pickup_tick = -1;  // unset while waiting
  bool delivered = false;

  Tick wait_ticks() const { return pickup_tick - request_tick; }
};

// Everything a controller may look at when an epoch starts.
struct FleetState {
  const Scenario* scenario = nullptr;
  double tick_s = 6.0;
  double epoch_s = 300.0;
  Tick now = 0;
  std::vector<Vehicle> vehicles;
  std::vector<CustomerRequest> customers;
  std::vector<std::deque<int>> queues;       // per region, customer ids FIFO
  std::vector<std::deque<int>> idle;         // per region, vehicle ids FIFO
  DemandSet history;                         // requests seen so far, absolute steps

  int regions() const { return static_cast<int>(queues.size()); }
  double wall() const { return static_cast<double>(now) * tick_s; }
  // Completed planning intervals at the current tick.
  Step epoch_step() const { return static_cast<Step>(std::floor(wall() / epoch_s + 1e-9)); }
};

// Idle counts, vehicles arriving within the planning horizon by relative
// step, and queued customers per OD pair.
inline StateObservation observe(const FleetState& state, int horizon) {
  const int n = state.regions();
  StateObservation obs(n, horizon, state.epoch_step());
  const double w0 = state.wall();
  for (const auto& v : state.vehicles) {
    if (v.status == Vehicle::Status::kIdle) {
      ++obs.idle_a[static_cast<std::size_t>(v.region)];
      continue;
    }
    const double arrival_wall = static_cast<double>(v.arrival_tick) * state.tick_s;
    const auto rel = static_cast<Step>(std::floor((arrival_wall - w0) / state.epoch_s + 1e-9)) + 1;
    if (rel >= 1 && rel <= horizon) ++obs.inbound(v.region, rel);
  }
  for (int i = 0; i < n; ++i) {
    for (int c : state.queues[static_cast<std::size_t>(i)]) {
      ++obs.outstanding[{i, state.customers[static_cast<std::size_t>(c)].destination}];
    }
  }
  return obs;
}

struct MetricsLog {
  std::vector<double> waits_s;  // served customers, in customer id order
  // Per-tick series, sampled after the tick is processed.
  std::vector<std::int64_t> waiting;
  std::vector<std::int64_t> serving;
  std::vector<std::int64_t> rebalancing;
  std::vector<std::int64_t> idle;
  std::vector<std::int64_t> tasks_issued;
  std::vector<std::int64_t> arrived;    // cumulative requests
  std::vector<std::int64_t> delivered;  // cumulative drop-offs
  Tick first_tick = 0;

  std::int64_t fleet_size = 0;
  std::int64_t total_customers = 0;
  std::int64_t unserved_at_end = 0;
  std::int64_t total_reb_tasks = 0;           // vehicle units issued in tasks
  std::int64_t total_reb_vehicle_steps = 0;   // sum of tau over dispatched rebalancing vehicles
  std::int64_t rebalancing_dispatched = 0;

  // Controller solves; wall times are excluded from equality.
  std::vector<double> solve_seconds;
  std::vector<std::int64_t> solve_nodes;
  std::int64_t solve_fallbacks = 0;

  std::size_t ticks() const { return waiting.size(); }

  friend bool operator==(const MetricsLog& a, const MetricsLog& b) {
    return a.waits_s == b.waits_s && a.waiting == b.waiting && a.serving == b.serving &&
           a.rebalancing == b.rebalancing && a.idle == b.idle && a.tasks_issued == b.tasks_issued &&
           a.arrived == b.arrived && a.delivered == b.delivered && a.first_tick == b.first_tick &&
           a.fleet_size == b.fleet_size && a.total_customers == b.total_customers &&
           a.unserved_at_end == b.unserved_at_end && a.total_reb_tasks == b.total_reb_tasks &&
           a.total_reb_vehicle_steps == b.total_reb_vehicle_steps &&
           a.rebalancing_dispatched == b.rebalancing_dispatched && a.solve_nodes == b.solve_nodes &&
           a.solve_fallbacks == b.solve_fallbacks;
  }
};

struct WaitSummary {
  double mean = 0.0;
  double median = 0.0;
  double p95 = 0.0;
};

// p95 is the nearest-rank percentile.
inline WaitSummary summarize_waits(std::vector<double> waits) {
  WaitSummary s;
  if (waits.empty()) return s;
  std::sort(waits.begin(), waits.end());
  double sum = 0.0;
  for (double w : waits) sum += w;
  s.mean = sum / static_cast<double>(waits.size());
  const std::size_t mid = waits.size() / 2;
  s.median = waits.size() % 2 == 1 ? waits[mid] : 0.5 * (waits[mid - 1] + waits[mid]);
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(waits.size())));
  s.p95 = waits[std::max<std::size_t>(rank, 1) - 1];
  return s;
}

}  // namespace amod::sim
