#pragma once

// Receding-horizon rebalancing problem. Variables per (i, j, t) over the
// planning horizon: passenger flow x^p, rebalancing/idle flow x^r, pickups of
// outstanding customers w, and dropped predicted demand d.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "amod/core/errors.hpp"
#include "amod/core/scenario.hpp"
#include "amod/forecast/forecast.hpp"
#include "amod/offline/planner.hpp"
#include "amod/opt/branch_and_bound.hpp"
#include "amod/opt/simplex.hpp"
#include "amod/opt/sparse_lp.hpp"

namespace amod {

struct StateObservation {
  int regions = 0;
  int horizon = 0;                       // planning steps covered by inbound_v
  Step epoch_t0 = 0;                     // completed intervals at observation time
  std::vector<std::int64_t> idle_a;      // per region
  std::vector<std::int64_t> inbound_v;   // (t - 1) * N + j, t = 1..horizon
  std::map<std::pair<int, int>, std::int64_t> outstanding;  // lambda_ij0, positive entries

  StateObservation() = default;
  StateObservation(int n, int planning_horizon, Step t0)
      : regions(n),
        horizon(planning_horizon),
        epoch_t0(t0),
        idle_a(static_cast<std::size_t>(n), 0),
        inbound_v(static_cast<std::size_t>(n) * static_cast<std::size_t>(planning_horizon), 0) {}

  std::int64_t inbound(int j, Step t) const { return inbound_v[static_cast<std::size_t>((t - 1) * regions + j)]; }
  std::int64_t& inbound(int j, Step t) { return inbound_v[static_cast<std::size_t>((t - 1) * regions + j)]; }

  // s_it: idle vehicles join at the first step, arrivals at theirs.
  std::int64_t supply(int i, Step t) const {
    return inbound(i, t) + (t == 1 ? idle_a[static_cast<std::size_t>(i)] : 0);
  }

  std::int64_t outstanding_count(int i, int j) const {
    auto it = outstanding.find({i, j});
    return it == outstanding.end() ? 0 : it->second;
  }
};

struct MpcSettings {
  int horizon = 50;    // T
  bool prune = true;   // w/d/x^p only where demand or outstanding customers exist
};

struct MpcProblem {
  struct Var {
    enum Kind : std::uint8_t { kPassenger, kRebalance, kWait, kDrop } kind = kRebalance;
    int origin = 0;
    int destination = 0;
    Step t = 1;
  };

  opt::MilpProblem milp;
  std::vector<Var> vars;
  std::vector<opt::VarStatus> basis_hint;  // feasible slack-free starting basis
  int regions = 0;
  int horizon = 0;
  Step t0 = 0;
  int conservation_rows = 0;
  int demand_rows = 0;
  int outstanding_rows = 0;
};

struct MpcPlan {
  std::vector<PlanFlow> x_p;
  std::vector<PlanFlow> x_r;
  std::vector<PlanFlow> waits_w;
  std::vector<PlanFlow> drops_d;
  double objective = 0.0;
  opt::SolveStatus status = opt::SolveStatus::kOptimal;
  bool used_fallback = false;  // no incumbent within budget
  opt::SolverStats stats;
};

struct RebalanceTask {
  int origin = 0;
  int destination = 0;
  Step issue_step = 0;
  std::int64_t count = 0;

  friend bool operator==(const RebalanceTask&, const RebalanceTask&) = default;
};

inline MpcProblem build_mpc_problem(const StateObservation& obs, const Forecast& fc, const Scenario& scenario,
                                    const MpcSettings& settings = {}) {
  const int n = scenario.region_count();
  const int horizon = settings.horizon;
  if (horizon < 1) throw ModelError("mpc: planning horizon must be at least 1");
  if (obs.regions != n || fc.regions != n) throw ModelError("mpc: observation or forecast region count mismatch");
  if (obs.horizon < horizon || obs.idle_a.size() != static_cast<std::size_t>(n)) {
    throw ModelError("mpc: observation does not cover the planning horizon");
  }
  if (fc.t_forward > horizon) throw ModelError("mpc: forecast horizon exceeds the planning horizon");
  const Step t0 = obs.epoch_t0;

  MpcProblem p;
  p.regions = n;
  p.horizon = horizon;
  p.t0 = t0;
  auto& lp = p.milp.lp;
  using Var = MpcProblem::Var;

  // Active demand cells and their forecast.
  std::map<DemandKey, int> cells;
  if (settings.prune) {
    fc.lambda_hat.for_each_in(1, std::min(fc.t_forward, horizon), [&](const DemandKey& key, int count) {
      if (count > 0) cells.emplace(key, count);
    });
    for (const auto& [od, count] : obs.outstanding) {
      if (count <= 0) continue;
      for (Step t = 1; t <= horizon; ++t) cells.emplace(DemandKey{t, od.first, od.second}, 0);
    }
  } else {
    for (Step t = 1; t <= horizon; ++t) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) cells.emplace(DemandKey{t, i, j}, t <= fc.t_forward ? fc.get(i, j, t) : 0);
      }
    }
  }

  p.conservation_rows = n * horizon;
  for (int k = 0; k < p.conservation_rows; ++k) lp.add_row(opt::RowSense::kEqual, 0.0);
  auto cons_row = [&](int i, Step t) { return (t - 1) * n + i; };
  for (Step t = 1; t <= horizon; ++t) {
    for (int i = 0; i < n; ++i) lp.rhs[static_cast<std::size_t>(cons_row(i, t))] = static_cast<double>(obs.supply(i, t));
  }

  auto add_var = [&](Var v, double cost) {
    const int col = lp.add_variable(cost);
    p.vars.push_back(v);
    return col;
  };
  auto add_move = [&](int col, int i, int j, Step t) {
    lp.set(cons_row(i, t), col, 1.0);
    const Step arrival = t + scenario.travel(i, j, t0 + t);
    if (arrival <= horizon) lp.set(cons_row(j, arrival), col, -1.0);
  };

  std::vector<opt::VarStatus> status;
  for (Step t = 1; t <= horizon; ++t) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const int col = add_var(Var{Var::kRebalance, i, j, t}, scenario.costs.rebalance(i, j, t0 + t));
        add_move(col, i, j, t);
        status.push_back(i == j ? opt::VarStatus::kBasic : opt::VarStatus::kAtLower);
      }
    }
  }

  std::map<std::pair<int, int>, std::vector<int>> wait_cols;
  for (const auto& [key, count] : cells) {
    const int i = key.origin, j = key.destination;
    const Step t = key.t;
    const int row = lp.add_row(opt::RowSense::kEqual, static_cast<double>(count));
    ++p.demand_rows;
    const int xp = add_var(Var{Var::kPassenger, i, j, t}, 0.0);
    add_move(xp, i, j, t);
    lp.set(row, xp, 1.0);
    status.push_back(opt::VarStatus::kAtLower);
    const int d = add_var(Var{Var::kDrop, i, j, t}, scenario.costs.drop(i, j, t0 + t));
    lp.set(row, d, 1.0);
    status.push_back(opt::VarStatus::kBasic);
    const bool has_wait = settings.prune ? obs.outstanding_count(i, j) > 0 : true;
    if (has_wait) {
      const int w = add_var(Var{Var::kWait, i, j, t}, scenario.costs.wait_rate(i, j, t0 + t) * t);
      lp.set(row, w, -1.0);
      status.push_back(t == 1 ? opt::VarStatus::kBasic : opt::VarStatus::kAtLower);
      wait_cols[{i, j}].push_back(w);
    }
  }
  for (const auto& [od, cols] : wait_cols) {
    const int row = lp.add_row(opt::RowSense::kEqual, static_cast<double>(obs.outstanding_count(od.first, od.second)));
    ++p.outstanding_rows;
    for (int c : cols) lp.set(row, c, 1.0);
  }

  p.milp.integral.resize(static_cast<std::size_t>(lp.columns()));
  for (int j = 0; j < lp.columns(); ++j) p.milp.integral[static_cast<std::size_t>(j)] = j;
  p.basis_hint = std::move(status);
  p.basis_hint.resize(static_cast<std::size_t>(lp.columns() + lp.rows()), opt::VarStatus::kAtLower);
  return p;
}

namespace detail {

inline MpcPlan plan_from_values(const MpcProblem& p, const std::vector<double>& values) {
  MpcPlan plan;
  for (std::size_t k = 0; k < p.vars.size(); ++k) {
    const auto count = static_cast<std::int64_t>(std::llround(values[k]));
    if (count == 0) continue;
    const auto& v = p.vars[k];
    const PlanFlow f{v.origin, v.destination, v.t, count};
    switch (v.kind) {
      case MpcProblem::Var::kPassenger: plan.x_p.push_back(f); break;
      case MpcProblem::Var::kRebalance: plan.x_r.push_back(f); break;
      case MpcProblem::Var::kWait: plan.waits_w.push_back(f); break;
      case MpcProblem::Var::kDrop: plan.drops_d.push_back(f); break;
    }
  }
  return plan;
}

// Integral plan built step by step: vehicles first pick up outstanding and
// predicted customers, then follow the suggested (rounded-down) moves, and
// idle otherwise. Customers left over are scheduled at the last step and
// dropped, which keeps every row satisfied.
inline std::vector<double> greedy_repair(const MpcProblem& p, const std::vector<double>& suggestion) {
  const auto& lp = p.milp.lp;
  const int n = p.regions;
  const int horizon = p.horizon;
  std::vector<double> x(static_cast<std::size_t>(lp.columns()), 0.0);

  std::vector<int> xr(static_cast<std::size_t>(n) * n * horizon, -1);
  std::map<DemandKey, int> xp, wait, drop, row_of;
  std::map<std::pair<int, int>, std::int64_t> remaining;
  for (int c = 0; c < lp.columns(); ++c) {
    const auto& v = p.vars[static_cast<std::size_t>(c)];
    const DemandKey key{v.t, v.origin, v.destination};
    switch (v.kind) {
      case MpcProblem::Var::kRebalance:
        xr[static_cast<std::size_t>(((v.t - 1) * n + v.origin) * n + v.destination)] = c;
        break;
      case MpcProblem::Var::kPassenger: xp[key] = c; break;
      case MpcProblem::Var::kWait: wait[key] = c; break;
      case MpcProblem::Var::kDrop: drop[key] = c; break;
    }
  }
  // Demand rows follow the conservation rows in cell order; outstanding rows
  // follow in pair order.
  std::map<DemandKey, double> predicted;
  {
    int row = p.conservation_rows;
    for (const auto& [key, col] : xp) {
      (void)col;
      predicted[key] = lp.rhs[static_cast<std::size_t>(row++)];
    }
    std::map<std::pair<int, int>, bool> seen;
    for (const auto& [key, col] : wait) {
      (void)col;
      seen[{key.origin, key.destination}] = true;
    }
    for (const auto& [od, flag] : seen) {
      (void)flag;
      remaining[od] = static_cast<std::int64_t>(std::llround(lp.rhs[static_cast<std::size_t>(row++)]));
    }
  }

  std::vector<std::int64_t> avail(static_cast<std::size_t>(n) * horizon, 0);
  for (Step t = 1; t <= horizon; ++t) {
    for (int i = 0; i < n; ++i) {
      avail[static_cast<std::size_t>((t - 1) * n + i)] +=
          static_cast<std::int64_t>(std::llround(lp.rhs[static_cast<std::size_t>((t - 1) * n + i)]));
    }
  }
  // Arrival step of each column, read off its -1 conservation entry.
  std::vector<Step> arrival_of(static_cast<std::size_t>(lp.columns()), horizon + 1);
  for (const auto& e : lp.entries) {
    if (e.value < 0 && e.row < p.conservation_rows) arrival_of[static_cast<std::size_t>(e.col)] = e.row / n + 1;
  }
  auto move = [&](int col, int j, std::int64_t count) {
    x[static_cast<std::size_t>(col)] += static_cast<double>(count);
    const Step arrival = arrival_of[static_cast<std::size_t>(col)];
    if (arrival <= horizon) avail[static_cast<std::size_t>((arrival - 1) * n + j)] += count;
  };

  for (Step t = 1; t <= horizon; ++t) {
    for (int i = 0; i < n; ++i) {
      auto& a = avail[static_cast<std::size_t>((t - 1) * n + i)];
      for (int j = 0; j < n; ++j) {
        const DemandKey key{t, i, j};
        auto xp_it = xp.find(key);
        if (xp_it == xp.end()) continue;
        std::int64_t served_out = 0;
        if (auto w_it = wait.find(key); w_it != wait.end()) {
          auto& rem = remaining[{i, j}];
          served_out = t == horizon ? rem : std::min(rem, a);
          x[static_cast<std::size_t>(w_it->second)] = static_cast<double>(served_out);
          rem -= served_out;
        }
        const auto want = static_cast<std::int64_t>(std::llround(predicted[key])) + served_out;
        const auto take = std::min(want, a);
        move(xp_it->second, j, take);
        a -= take;
        x[static_cast<std::size_t>(drop.at(key))] = static_cast<double>(want - take);
      }
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const int col = xr[static_cast<std::size_t>(((t - 1) * n + i) * n + j)];
        const auto hint = static_cast<std::int64_t>(std::floor(suggestion[static_cast<std::size_t>(col)] + 1e-9));
        const auto take = std::min(std::max<std::int64_t>(hint, 0), a);
        if (take > 0) {
          move(col, j, take);
          a -= take;
        }
      }
      if (a > 0) {
        move(xr[static_cast<std::size_t>(((t - 1) * n + i) * n + i)], i, a);
        a = 0;
      }
    }
  }
  return x;
}

}  // namespace detail

inline MpcPlan solve_mpc(const MpcProblem& p, const opt::MilpLimits& limits = {}) {
  opt::SolveResult r = opt::solve_milp(p.milp, limits, &p.basis_hint);
  MpcPlan plan;
  if (r.has_solution()) {
    for (int j : p.milp.integral) r.values[static_cast<std::size_t>(j)] = std::round(r.values[static_cast<std::size_t>(j)]);
    plan = detail::plan_from_values(p, r.values);
    plan.objective = p.milp.lp.evaluate(r.values);
  } else {
    // No incumbent: round the relaxation down and repair it greedily.
    opt::RevisedSimplex simplex(p.milp.lp);
    auto relax = simplex.solve(p.milp.lp.lower, p.milp.lp.upper, &p.basis_hint, limits.lp);
    std::vector<double> suggestion(static_cast<std::size_t>(p.milp.lp.columns()), 0.0);
    if (relax.status == opt::SolveStatus::kOptimal) suggestion = relax.values;
    const auto values = detail::greedy_repair(p, suggestion);
    plan = detail::plan_from_values(p, values);
    plan.objective = p.milp.lp.evaluate(values);
    plan.used_fallback = true;
    r.stats.iterations += relax.stats.iterations;
  }
  plan.status = r.status;
  plan.stats = std::move(r.stats);
  return plan;
}

inline std::vector<RebalanceTask> first_step_tasks(const MpcPlan& plan, Step issue_step = 0) {
  std::vector<RebalanceTask> tasks;
  for (const auto& f : plan.x_r) {
    if (f.t == 1 && f.origin != f.destination && f.count > 0) {
      tasks.push_back({f.origin, f.destination, issue_step, f.count});
    }
  }
  std::sort(tasks.begin(), tasks.end(), [](const RebalanceTask& a, const RebalanceTask& b) {
    return std::pair(a.origin, a.destination) < std::pair(b.origin, b.destination);
  });
  return tasks;
}

// Objective of a plan recomputed from the cost model.
inline double mpc_plan_cost(const MpcPlan& plan, const Scenario& scenario, Step t0) {
  double total = 0.0;
  for (const auto& f : plan.x_r) total += scenario.costs.rebalance(f.origin, f.destination, t0 + f.t) * f.count;
  for (const auto& f : plan.waits_w) total += scenario.costs.wait_rate(f.origin, f.destination, t0 + f.t) * f.t * f.count;
  for (const auto& f : plan.drops_d) total += scenario.costs.drop(f.origin, f.destination, t0 + f.t) * f.count;
  return total;
}

inline void write_mpc_plan_csv(std::ostream& os, const MpcPlan& plan, const RegionSet& regions) {
  os << "origin,destination,t,kind,count\n";
  auto rows = [&](const std::vector<PlanFlow>& flows, const char* kind) {
    for (const auto& f : flows) {
      const char* k = kind;
      if (k == nullptr) k = f.origin == f.destination ? "idle" : "rebalance";
      os << regions.id(f.origin) << ',' << regions.id(f.destination) << ',' << f.t << ',' << k << ',' << f.count
         << '\n';
    }
  };
  rows(plan.x_p, "passenger");
  rows(plan.x_r, nullptr);
  rows(plan.waits_w, "wait");
  rows(plan.drops_d, "drop");
}

}  // namespace amod
