#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "amod/core/errors.hpp"
#include "amod/forecast/forecast.hpp"
#include "amod/mpc/mpc.hpp"
#include "amod/opt/branch_and_bound.hpp"
#include "amod/opt/flow_network.hpp"
#include "amod/opt/network_simplex.hpp"
#include "amod/sim/state.hpp"

namespace amod::sim {

struct SolveRecord {
  Step epoch = 0;
  double seconds = 0.0;
  std::int64_t nodes = 0;
  std::int64_t iterations = 0;
  bool fallback = false;
  bool optimal = true;
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::vector<RebalanceTask> plan(const FleetState& state) = 0;
  virtual std::string name() const = 0;
  const std::vector<SolveRecord>& solves() const { return solves_; }

 protected:
  std::vector<SolveRecord> solves_;
};

// Receding-horizon controller: observe, forecast, solve, keep the first step.
class MpcController final : public Controller {
 public:
  MpcController(const Scenario& scenario, std::unique_ptr<Forecaster> forecaster, MpcSettings settings,
                opt::MilpLimits limits, std::string name = "mpc")
      : scenario_(scenario),
        forecaster_(std::move(forecaster)),
        settings_(settings),
        limits_(limits),
        name_(std::move(name)) {
    if (forecaster_->t_forward() > settings_.horizon) {
      throw InputError("t_forward (" + std::to_string(forecaster_->t_forward()) +
                       ") exceeds the planning horizon (" + std::to_string(settings_.horizon) + ")");
    }
  }

  std::vector<RebalanceTask> plan(const FleetState& state) override {
    const auto started = std::chrono::steady_clock::now();
    const StateObservation obs = observe(state, settings_.horizon);
    const Forecast fc = forecaster_->forecast(state.history, obs.epoch_t0);
    const MpcProblem problem = build_mpc_problem(obs, fc, scenario_, settings_);
    const MpcPlan plan = solve_mpc(problem, limits_);
    SolveRecord rec;
    rec.epoch = obs.epoch_t0;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    rec.nodes = plan.stats.nodes;
    rec.iterations = plan.stats.iterations;
    rec.fallback = plan.used_fallback;
    rec.optimal = plan.status == opt::SolveStatus::kOptimal;
    solves_.push_back(rec);
    return first_step_tasks(plan, obs.epoch_t0);
  }

  std::string name() const override { return name_; }

 private:
  const Scenario& scenario_;
  std::unique_ptr<Forecaster> forecaster_;
  MpcSettings settings_;
  opt::MilpLimits limits_;
  std::string name_;
};

// Time-invariant baseline: equalize vehicle excess across regions with a
// transportation problem on travel times.
class ReactiveController final : public Controller {
 public:
  explicit ReactiveController(const Scenario& scenario) : scenario_(scenario) {}

  struct Balance {
    std::vector<std::int64_t> excess;   // idle + inbound - queued
    std::vector<std::int64_t> desired;
  };

  static Balance balance(const FleetState& state) {
    const int n = state.regions();
    Balance b;
    b.excess.assign(static_cast<std::size_t>(n), 0);
    for (const auto& v : state.vehicles) ++b.excess[static_cast<std::size_t>(v.region)];
    for (int i = 0; i < n; ++i) {
      b.excess[static_cast<std::size_t>(i)] -= static_cast<std::int64_t>(state.queues[static_cast<std::size_t>(i)].size());
    }
    std::int64_t total = 0;
    for (auto e : b.excess) total += e;
    const std::int64_t share = total > 0 ? total / n : 0;
    b.desired.assign(static_cast<std::size_t>(n), share);
    return b;
  }

  // Moves from idle surplus to deficit regions; every deficit is covered as
  // far as the movable surplus allows.
  static std::vector<RebalanceTask> transport(const std::vector<std::int64_t>& movable,
                                              const std::vector<std::int64_t>& deficit,
                                              const TravelTimeMatrix& travel, Step t, Step issue_step) {
    const int n = static_cast<int>(movable.size());
    opt::FlowNetwork net;
    std::int64_t supply = 0, demand = 0;
    for (int i = 0; i < n; ++i) {
      net.add_node(movable[static_cast<std::size_t>(i)] - deficit[static_cast<std::size_t>(i)]);
      supply += movable[static_cast<std::size_t>(i)];
      demand += deficit[static_cast<std::size_t>(i)];
    }
    std::vector<std::pair<int, int>> arc_od;
    for (int i = 0; i < n; ++i) {
      if (movable[static_cast<std::size_t>(i)] <= 0) continue;
      for (int j = 0; j < n; ++j) {
        if (i == j || deficit[static_cast<std::size_t>(j)] <= 0) continue;
        net.add_arc(i, j, 0, opt::kInfiniteCapacity, travel(i, j, t));
        arc_od.emplace_back(i, j);
      }
    }
    // The side with more units keeps the remainder through a free dummy node.
    const int dummy = net.add_node(demand - supply);
    for (int i = 0; i < n; ++i) {
      if (supply > demand && movable[static_cast<std::size_t>(i)] > 0) net.add_arc(i, dummy, 0, opt::kInfiniteCapacity, 0.0);
      if (demand > supply && deficit[static_cast<std::size_t>(i)] > 0) net.add_arc(dummy, i, 0, opt::kInfiniteCapacity, 0.0);
    }
    auto sol = opt::solve_min_cost_flow(net);
    if (sol.status != opt::SolveStatus::kOptimal) throw ModelError("reactive controller: transportation problem failed");
    std::vector<RebalanceTask> tasks;
    for (std::size_t k = 0; k < arc_od.size(); ++k) {
      const auto f = sol.flow[k];
      if (f > 0) tasks.push_back({arc_od[k].first, arc_od[k].second, issue_step, f});
    }
    return tasks;
  }

  std::vector<RebalanceTask> plan(const FleetState& state) override {
    const int n = state.regions();
    const Balance b = balance(state);
    std::vector<std::int64_t> movable(static_cast<std::size_t>(n), 0), deficit(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
      const auto gap = b.excess[static_cast<std::size_t>(i)] - b.desired[static_cast<std::size_t>(i)];
      const auto idle = static_cast<std::int64_t>(state.idle[static_cast<std::size_t>(i)].size());
      if (gap > 0) movable[static_cast<std::size_t>(i)] = std::min(gap, idle);
      if (gap < 0) deficit[static_cast<std::size_t>(i)] = -gap;
    }
    const Step t0 = state.epoch_step();
    return transport(movable, deficit, scenario_.travel, t0 + 1, t0);
  }

  std::string name() const override { return "reactive"; }

 private:
  const Scenario& scenario_;
};

// Leaves vehicles where they are.
class IdleController final : public Controller {
 public:
  std::vector<RebalanceTask> plan(const FleetState&) override { return {}; }
  std::string name() const override { return "none"; }
};

}  // namespace amod::sim
