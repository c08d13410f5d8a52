#pragma once

// Tick-based fleet simulator replaying a trip log. Order within a tick:
// vehicle arrivals, the controller (at epoch boundaries), new requests,
// FIFO customer matching, pending rebalancing tasks, then metrics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "amod/core/errors.hpp"
#include "amod/core/scenario.hpp"
#include "amod/core/trips.hpp"
#include "amod/offline/planner.hpp"
#include "amod/sim/controllers.hpp"
#include "amod/sim/state.hpp"

namespace amod::sim {

struct SimConfig {
  double tick_s = 6.0;
  double epoch_s = 300.0;
  double start_s = 0.0;
  double end_s = -1.0;     // negative: day length plus drain_s
  double drain_s = 3600.0;
  std::vector<std::int64_t> initial;  // vehicles per region
  std::uint64_t seed = 1;
};

// Evenly spread fleet; the remainder goes to regions chosen by the seed.
inline std::vector<std::int64_t> uniform_distribution(std::int64_t fleet, int regions, std::uint64_t seed) {
  if (regions < 1 || fleet < 0) throw InputError("uniform_distribution: need regions >= 1 and fleet >= 0");
  std::vector<std::int64_t> dist(static_cast<std::size_t>(regions), fleet / regions);
  std::vector<int> order(static_cast<std::size_t>(regions));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (int k = regions - 1; k > 0; --k) {
    const auto pick = static_cast<int>(rng() % static_cast<std::uint64_t>(k + 1));
    std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(pick)]);
  }
  for (std::int64_t r = 0; r < fleet % regions; ++r) ++dist[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
  return dist;
}

// Offline seed positions, with any vehicles beyond the offline minimum spread
// evenly on top.
inline std::vector<std::int64_t> offline_distribution(const RebalancingPlan& plan, std::int64_t fleet,
                                                      std::uint64_t seed) {
  auto dist = plan.seed;
  if (fleet < plan.fleet_size_m) {
    throw InputError("fleet of " + std::to_string(fleet) + " is below the offline minimum " +
                     std::to_string(plan.fleet_size_m));
  }
  const auto extra = uniform_distribution(fleet - plan.fleet_size_m, static_cast<int>(dist.size()), seed);
  for (std::size_t i = 0; i < dist.size(); ++i) dist[i] += extra[i];
  return dist;
}

class Simulator {
 public:
  Simulator(const Scenario& scenario, const TripLog& trips, SimConfig config)
      : scenario_(scenario), trips_(trips), config_(std::move(config)) {
    if (!(config_.tick_s > 0.0) || !(config_.epoch_s > 0.0)) throw InputError("simulator: tick and epoch must be positive");
    const double ratio = config_.epoch_s / config_.tick_s;
    if (std::abs(ratio - std::round(ratio)) > 1e-9) throw InputError("simulator: tick must divide the epoch");
    if (std::abs(config_.epoch_s - scenario.grid.delta_t_s) > 1e-9) {
      throw InputError("simulator: epoch differs from the scenario planning interval");
    }
    ticks_per_epoch_ = static_cast<Tick>(std::llround(ratio));
    const int n = scenario.region_count();
    if (config_.initial.size() != static_cast<std::size_t>(n)) throw InputError("simulator: initial distribution size");
    for (const auto& trip : trips.trips) {
      if (trip.origin < 0 || trip.origin >= n || trip.destination < 0 || trip.destination >= n) {
        throw InputError("simulator: trip references an unknown region");
      }
      if (!(trip.duration_s > 0.0) || trip.request_time < 0.0) throw InputError("simulator: malformed trip");
    }
    reb_ticks_.assign(static_cast<std::size_t>(n) * n, 1);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        reb_ticks_[static_cast<std::size_t>(i * n + j)] =
            travel_ticks(scenario.travel.seconds(i, j, scenario.grid.delta_t_s), config_.tick_s);
      }
    }
  }

  // Called after every tick; used by tests to check invariants.
  using Observer = std::function<void(const FleetState&, const MetricsLog&)>;

  MetricsLog run(Controller& controller, const Observer& observer = {}) {
    const int n = scenario_.region_count();
    FleetState s;
    s.scenario = &scenario_;
    s.tick_s = config_.tick_s;
    s.epoch_s = config_.epoch_s;
    s.queues.assign(static_cast<std::size_t>(n), {});
    s.idle.assign(static_cast<std::size_t>(n), {});

    MetricsLog log;
    for (int i = 0; i < n; ++i) {
      for (std::int64_t k = 0; k < config_.initial[static_cast<std::size_t>(i)]; ++k) {
        Vehicle v;
        v.id = static_cast<int>(s.vehicles.size());
        v.region = i;
        s.idle[static_cast<std::size_t>(i)].push_back(v.id);
        s.vehicles.push_back(v);
      }
    }
    log.fleet_size = static_cast<std::int64_t>(s.vehicles.size());

    // Customers in request order; ids follow that order.
    const Tick start = static_cast<Tick>(std::ceil(config_.start_s / config_.tick_s - 1e-9));
    const double end_s = config_.end_s >= 0.0
                             ? config_.end_s
                             : scenario_.grid.delta_t_s * scenario_.grid.horizon + config_.drain_s;
    const Tick end = static_cast<Tick>(std::ceil(end_s / config_.tick_s - 1e-9));
    for (const auto& trip : trips_.trips) {
      const Tick request = static_cast<Tick>(std::ceil(trip.request_time / config_.tick_s - 1e-9));
      if (request < start || request >= end) continue;
      CustomerRequest c;
      c.id = static_cast<int>(s.customers.size());
      c.request_tick = request;
      c.origin = trip.origin;
      c.destination = trip.destination;
      c.trip_ticks = travel_ticks(trip.duration_s, config_.tick_s);
      s.customers.push_back(c);
    }
    std::stable_sort(s.customers.begin(), s.customers.end(),
                     [](const CustomerRequest& a, const CustomerRequest& b) { return a.request_tick < b.request_tick; });
    for (std::size_t k = 0; k < s.customers.size(); ++k) s.customers[k].id = static_cast<int>(k);
    log.total_customers = static_cast<std::int64_t>(s.customers.size());

    using Arrival = std::pair<Tick, int>;
    std::priority_queue<Arrival, std::vector<Arrival>, std::greater<>> arrivals;
    std::vector<RebalanceTask> pending;
    std::size_t next_customer = 0;
    std::int64_t waiting = 0, serving = 0, rebalancing = 0, delivered = 0;
    log.first_tick = start;

    for (Tick now = start; now < end; ++now) {
      s.now = now;
      std::int64_t issued = 0;

      while (!arrivals.empty() && arrivals.top().first == now) {
        Vehicle& v = s.vehicles[static_cast<std::size_t>(arrivals.top().second)];
        arrivals.pop();
        if (v.status == Vehicle::Status::kServing) {
          s.customers[static_cast<std::size_t>(v.customer)].delivered = true;
          ++delivered;
          --serving;
        } else {
          --rebalancing;
        }
        v.status = Vehicle::Status::kIdle;
        v.customer = -1;
        s.idle[static_cast<std::size_t>(v.region)].push_back(v.id);
      }

      if (now % ticks_per_epoch_ == 0) {
        pending = controller.plan(s);
        for (const auto& task : pending) {
          if (task.origin < 0 || task.origin >= n || task.destination < 0 || task.destination >= n || task.count < 1) {
            throw ModelError("controller produced an invalid task");
          }
          issued += task.count;
        }
        log.total_reb_tasks += issued;
      }

      while (next_customer < s.customers.size() && s.customers[next_customer].request_tick == now) {
        const auto& c = s.customers[next_customer];
        s.queues[static_cast<std::size_t>(c.origin)].push_back(c.id);
        s.history.add(c.origin, c.destination, static_cast<Step>(std::floor(static_cast<double>(now) * config_.tick_s / config_.epoch_s + 1e-9)) + 1);
        ++waiting;
        ++next_customer;
      }

      for (int i = 0; i < n; ++i) {
        auto& queue = s.queues[static_cast<std::size_t>(i)];
        auto& idle = s.idle[static_cast<std::size_t>(i)];
        while (!queue.empty() && !idle.empty()) {
          auto& c = s.customers[static_cast<std::size_t>(queue.front())];
          queue.pop_front();
          Vehicle& v = s.vehicles[static_cast<std::size_t>(idle.front())];
          idle.pop_front();
          c.pickup_tick = now;
          v.status = Vehicle::Status::kServing;
          v.customer = c.id;
          v.region = c.destination;
          v.arrival_tick = now + c.trip_ticks;
          arrivals.emplace(v.arrival_tick, v.id);
          --waiting;
          ++serving;
        }
      }

      for (auto& task : pending) {
        auto& idle = s.idle[static_cast<std::size_t>(task.origin)];
        while (task.count > 0 && !idle.empty()) {
          Vehicle& v = s.vehicles[static_cast<std::size_t>(idle.front())];
          idle.pop_front();
          v.status = Vehicle::Status::kRebalancing;
          v.region = task.destination;
          v.arrival_tick = now + reb_ticks_[static_cast<std::size_t>(task.origin * n + task.destination)];
          arrivals.emplace(v.arrival_tick, v.id);
          --task.count;
          ++rebalancing;
          ++log.rebalancing_dispatched;
          log.total_reb_vehicle_steps += scenario_.travel(task.origin, task.destination, s.epoch_step() + 1);
        }
      }

      std::int64_t idle_total = 0;
      for (const auto& q : s.idle) idle_total += static_cast<std::int64_t>(q.size());
      log.waiting.push_back(waiting);
      log.serving.push_back(serving);
      log.rebalancing.push_back(rebalancing);
      log.idle.push_back(idle_total);
      log.tasks_issued.push_back(issued);
      log.arrived.push_back(static_cast<std::int64_t>(next_customer));
      log.delivered.push_back(delivered);
      if (observer) observer(s, log);
    }

    for (const auto& c : s.customers) {
      if (c.pickup_tick >= 0) {
        log.waits_s.push_back(static_cast<double>(c.wait_ticks()) * config_.tick_s);
      } else {
        ++log.unserved_at_end;
      }
    }
    for (const auto& rec : controller.solves()) {
      log.solve_seconds.push_back(rec.seconds);
      log.solve_nodes.push_back(rec.nodes);
      if (rec.fallback) ++log.solve_fallbacks;
    }
    return log;
  }

 private:
  const Scenario& scenario_;
  const TripLog& trips_;
  SimConfig config_;
  Tick ticks_per_epoch_ = 1;
  std::vector<Tick> reb_ticks_;
};

}  // namespace amod::sim
