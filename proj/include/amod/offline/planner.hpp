#pragma once

// Offline rebalancing over a time-expanded network with free starting
// positions. The constraint matrix is a network matrix, so the integer
// program is solved exactly as a minimum-cost circulation.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "amod/core/errors.hpp"
#include "amod/core/scenario.hpp"
#include "amod/opt/flow_network.hpp"
#include "amod/opt/network_simplex.hpp"
#include "amod/opt/sparse_lp.hpp"

namespace amod {

struct PlanFlow {
  int origin = 0;
  int destination = 0;
  Step t = 1;
  std::int64_t count = 0;

  friend bool operator==(const PlanFlow&, const PlanFlow&) = default;
};

struct RebalancingPlan {
  std::vector<PlanFlow> x_p;          // passenger flows, nonzero entries
  std::vector<PlanFlow> x_r;          // rebalancing and idle flows, nonzero entries
  std::vector<std::int64_t> seed;     // s_i1 per region
  std::int64_t fleet_size_m = 0;
  double objective = 0.0;
  opt::SolverStats stats;
};

// Node (i, t) for t = 1..T is index (t - 1) * N + i; the source and sink
// follow. Every vehicle path runs source -> (i,1) -> ... -> sink and the
// return arc closes the circulation, so its flow is the fleet size.
struct TimeExpandedNetwork {
  opt::FlowNetwork net;
  int regions = 0;
  int horizon = 0;
  int source = 0;
  int sink = 0;
  int return_arc = 0;

  struct ArcInfo {
    enum Kind { kPassenger, kRebalance, kSeed, kReturn } kind = kRebalance;
    int origin = 0;
    int destination = 0;
    Step t = 1;
  };
  std::vector<ArcInfo> info;  // one per arc

  int node(int region, Step t) const { return (t - 1) * regions + region; }
};

inline TimeExpandedNetwork build_time_expanded_network(const Scenario& scenario) {
  if (auto problems = validate(scenario); !problems.empty()) throw InputError("scenario: " + problems.front());
  TimeExpandedNetwork g;
  const int n = scenario.region_count();
  const int horizon = scenario.grid.horizon;
  g.regions = n;
  g.horizon = horizon;
  for (int k = 0; k < n * horizon; ++k) g.net.add_node();
  g.source = g.net.add_node();
  g.sink = g.net.add_node();

  auto head_of = [&](int j, Step arrival) { return arrival > horizon ? g.sink : g.node(j, arrival); };
  using Info = TimeExpandedNetwork::ArcInfo;

  for (const auto& [key, count] : scenario.demand.entries()) {
    if (count == 0) continue;
    const int tau = scenario.travel(key.origin, key.destination, key.t);
    g.net.add_arc(g.node(key.origin, key.t), head_of(key.destination, key.t + tau), count, count, 0.0);
    g.info.push_back(Info{Info::kPassenger, key.origin, key.destination, key.t});
  }
  for (Step t = 1; t <= horizon; ++t) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const int tau = scenario.travel(i, j, t);
        g.net.add_arc(g.node(i, t), head_of(j, t + tau), 0, opt::kInfiniteCapacity,
                      scenario.costs.rebalance(i, j, t));
        g.info.push_back(Info{Info::kRebalance, i, j, t});
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    g.net.add_arc(g.source, g.node(i, 1), 0, opt::kInfiniteCapacity, 0.0);
    g.info.push_back(Info{Info::kSeed, i, i, 1});
  }
  g.return_arc = g.net.add_arc(g.sink, g.source, 0, opt::kInfiniteCapacity, 0.0);
  g.info.push_back(Info{Info::kReturn, 0, 0, 1});
  return g;
}

struct OfflineOptions {
  // Among cost-optimal plans, pick one with the fewest vehicles.
  bool minimize_fleet = true;
};

namespace detail {

inline RebalancingPlan extract_plan(const TimeExpandedNetwork& g, const std::vector<std::int64_t>& flow) {
  RebalancingPlan plan;
  plan.seed.assign(static_cast<std::size_t>(g.regions), 0);
  for (int k = 0; k < g.net.arc_count(); ++k) {
    const auto f = flow[static_cast<std::size_t>(k)];
    const auto& a = g.info[static_cast<std::size_t>(k)];
    switch (a.kind) {
      case TimeExpandedNetwork::ArcInfo::kPassenger:
        if (f > 0) plan.x_p.push_back({a.origin, a.destination, a.t, f});
        break;
      case TimeExpandedNetwork::ArcInfo::kRebalance:
        if (f > 0) plan.x_r.push_back({a.origin, a.destination, a.t, f});
        break;
      case TimeExpandedNetwork::ArcInfo::kSeed:
        plan.seed[static_cast<std::size_t>(a.origin)] = f;
        break;
      case TimeExpandedNetwork::ArcInfo::kReturn:
        plan.fleet_size_m = f;
        break;
    }
  }
  return plan;
}

}  // namespace detail

inline double plan_cost(const RebalancingPlan& plan, const CostModel& costs) {
  double total = 0.0;
  for (const auto& f : plan.x_r) total += costs.rebalance(f.origin, f.destination, f.t) * static_cast<double>(f.count);
  return total;
}

inline RebalancingPlan solve_offline(const Scenario& scenario, const OfflineOptions& options = {}) {
  TimeExpandedNetwork g = build_time_expanded_network(scenario);
  auto first = opt::solve_min_cost_flow(g.net);
  if (first.status != opt::SolveStatus::kOptimal) {
    throw ModelError("offline planner: min-cost flow returned " + std::string(opt::to_string(first.status)));
  }
  opt::SolverStats stats = first.stats;
  std::vector<std::int64_t> flow = std::move(first.flow);

  if (options.minimize_fleet) {
    // Optimal plans are exactly the feasible flows that respect complementary
    // slackness with the optimal potentials: pin every arc with nonzero
    // reduced cost and minimize the return-arc flow over the rest.
    double scale = 1.0;
    for (const auto& a : g.net.arcs()) scale = std::max(scale, std::abs(a.cost));
    const double tol = 1e-9 * scale;
    opt::FlowNetwork second = g.net;
    for (int k = 0; k < second.arc_count(); ++k) {
      auto& a = second.arc(k);
      const double rc = first.reduced_cost(g.net, k);
      if (rc > tol || rc < -tol) a.lower = a.upper = flow[static_cast<std::size_t>(k)];
      a.cost = k == g.return_arc ? 1.0 : 0.0;
    }
    auto refined = opt::solve_min_cost_flow(second);
    if (refined.status != opt::SolveStatus::kOptimal) {
      throw ModelError("offline planner: fleet refinement returned " + std::string(opt::to_string(refined.status)));
    }
    flow = std::move(refined.flow);
    stats.iterations += refined.stats.iterations;
    stats.wall_seconds += refined.stats.wall_seconds;
  }

  RebalancingPlan plan = detail::extract_plan(g, flow);
  plan.objective = plan_cost(plan, scenario.costs);
  plan.stats = stats;
  return plan;
}

inline std::int64_t fleet_size(const Scenario& scenario) { return solve_offline(scenario).fleet_size_m; }

// Largest |outflow - inflow - seed| over the (region, step) nodes; zero for a
// valid plan.
inline std::int64_t conservation_residual(const Scenario& scenario, const RebalancingPlan& plan) {
  const int n = scenario.region_count();
  const int horizon = scenario.grid.horizon;
  std::vector<std::int64_t> net(static_cast<std::size_t>(n) * static_cast<std::size_t>(horizon), 0);
  auto at = [&](int i, Step t) -> std::int64_t& { return net[static_cast<std::size_t>((t - 1) * n + i)]; };
  auto move = [&](const PlanFlow& f) {
    at(f.origin, f.t) += f.count;
    const Step arrival = f.t + scenario.travel(f.origin, f.destination, f.t);
    if (arrival <= horizon) at(f.destination, arrival) -= f.count;
  };
  for (const auto& f : plan.x_p) move(f);
  for (const auto& f : plan.x_r) move(f);
  for (int i = 0; i < n; ++i) at(i, 1) -= plan.seed[static_cast<std::size_t>(i)];
  std::int64_t worst = 0;
  for (auto v : net) worst = std::max(worst, v < 0 ? -v : v);
  return worst;
}

// The same problem written as a general LP with integrality dropped:
// columns x^r(i,j,t) in (t, i, j) order, then x^p per demand cell fixed to
// lambda, then s_i1; one equality row per (i, t).
inline opt::SparseLinearProgram offline_lp_relaxation(const Scenario& scenario) {
  if (auto problems = validate(scenario); !problems.empty()) throw InputError("scenario: " + problems.front());
  const int n = scenario.region_count();
  const int horizon = scenario.grid.horizon;
  opt::SparseLinearProgram lp;
  for (Step t = 1; t <= horizon; ++t) {
    for (int i = 0; i < n; ++i) lp.add_row(opt::RowSense::kEqual, 0.0);
  }
  auto row = [&](int i, Step t) { return (t - 1) * n + i; };
  auto add_move = [&](int col, int i, int j, Step t) {
    lp.set(row(i, t), col, 1.0);
    const Step arrival = t + scenario.travel(i, j, t);
    if (arrival <= horizon) lp.set(row(j, arrival), col, -1.0);
  };
  for (Step t = 1; t <= horizon; ++t) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const int col = lp.add_variable(scenario.costs.rebalance(i, j, t), 0.0, opt::kInf,
                                        "xr_" + std::to_string(i) + "_" + std::to_string(j) + "_" + std::to_string(t));
        add_move(col, i, j, t);
      }
    }
  }
  for (const auto& [key, count] : scenario.demand.entries()) {
    const int col = lp.add_variable(0.0, count, count,
                                    "xp_" + std::to_string(key.origin) + "_" + std::to_string(key.destination) + "_" +
                                        std::to_string(key.t));
    add_move(col, key.origin, key.destination, key.t);
  }
  for (int i = 0; i < n; ++i) {
    const int col = lp.add_variable(0.0, 0.0, opt::kInf, "s_" + std::to_string(i));
    lp.set(row(i, 1), col, -1.0);
  }
  return lp;
}

// Tabular plan rows: origin,destination,t,kind,count with region ids.
inline void write_plan_csv(std::ostream& os, const RebalancingPlan& plan, const RegionSet& regions) {
  os << "origin,destination,t,kind,count\n";
  for (std::size_t i = 0; i < plan.seed.size(); ++i) {
    if (plan.seed[i] > 0) {
      const auto& id = regions.id(static_cast<int>(i));
      os << id << ',' << id << ",1,seed," << plan.seed[i] << '\n';
    }
  }
  for (const auto& f : plan.x_p) {
    os << regions.id(f.origin) << ',' << regions.id(f.destination) << ',' << f.t << ",passenger," << f.count << '\n';
  }
  for (const auto& f : plan.x_r) {
    os << regions.id(f.origin) << ',' << regions.id(f.destination) << ',' << f.t << ','
       << (f.origin == f.destination ? "idle" : "rebalance") << ',' << f.count << '\n';
  }
}

}  // namespace amod
