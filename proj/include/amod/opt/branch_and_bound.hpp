#pragma once

// LP-based branch and bound. Best-first node selection with depth-first
// plunging after each branching, most-fractional variable selection (lowest
// index on ties), children warm-started from the parent basis.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <vector>

#include "amod/core/errors.hpp"
#include "amod/opt/simplex.hpp"
#include "amod/opt/sparse_lp.hpp"
#include "amod/opt/types.hpp"

namespace amod::opt {

struct MilpLimits {
  std::int64_t node_limit = 100000;
  double time_limit_s = 120.0;
  double relative_gap = Tolerances::kRelativeGap;
  SimplexOptions lp;
};

namespace detail {

struct BoundChange {
  int var = 0;
  double lower = 0.0;
  double upper = 0.0;
};

struct BranchNode {
  double bound = 0.0;
  int depth = 0;
  std::int64_t order = 0;
  std::vector<BoundChange> changes;  // path from the root
  std::shared_ptr<const std::vector<VarStatus>> basis;
};

struct WorseNode {
  bool operator()(const BranchNode& a, const BranchNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.order > b.order;
  }
};

inline double relative_gap(double incumbent, double bound) {
  if (incumbent == kInf) return kInf;
  return std::max(0.0, incumbent - bound) / std::max(1.0, std::abs(incumbent));
}

}  // namespace detail

// Most fractional integral variable of x, or -1 when x is integral.
inline int most_fractional(const std::vector<double>& x, const std::vector<int>& integral) {
  int best = -1;
  double best_frac = Tolerances::kIntegrality;
  for (int j : integral) {
    const double v = x[static_cast<std::size_t>(j)];
    const double frac = std::abs(v - std::round(v));
    if (frac > best_frac || (frac == best_frac && best >= 0 && j < best)) {
      if (frac > Tolerances::kIntegrality) {
        best_frac = frac;
        best = j;
      }
    }
  }
  return best;
}

// root_basis optionally warm-starts the root relaxation.
inline SolveResult solve_milp(const MilpProblem& problem, const MilpLimits& limits = {},
                              const std::vector<VarStatus>* root_basis = nullptr) {
  if (auto issues = problem.validate(); !issues.empty()) throw ModelError("solve_milp: " + issues.front());
  if (problem.integral.empty() && root_basis == nullptr) return solve_lp(problem.lp, limits.lp);

  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(); };

  const auto& lp = problem.lp;
  RevisedSimplex simplex(lp);
  std::vector<int> integral = problem.integral;
  std::sort(integral.begin(), integral.end());
  integral.erase(std::unique(integral.begin(), integral.end()), integral.end());

  // Integral columns get their bounds tightened to integers up front.
  std::vector<double> root_lower = lp.lower;
  std::vector<double> root_upper = lp.upper;
  for (int j : integral) {
    auto& lo = root_lower[static_cast<std::size_t>(j)];
    auto& up = root_upper[static_cast<std::size_t>(j)];
    if (lo != -kInf) lo = std::ceil(lo - Tolerances::kIntegrality);
    if (up != kInf) up = std::floor(up + Tolerances::kIntegrality);
  }

  SolveResult best;
  best.status = SolveStatus::kInfeasible;
  SolverStats& stats = best.stats;
  double incumbent = kInf;
  double global_bound = -kInf;
  bool truncated = false;

  std::priority_queue<detail::BranchNode, std::vector<detail::BranchNode>, detail::WorseNode> open;
  std::int64_t order = 0;
  std::vector<double> lower = root_lower;
  std::vector<double> upper = root_upper;

  auto open_bound = [&](double current) {
    double b = current;
    if (!open.empty()) b = std::min(b, open.top().bound);
    return b;
  };
  auto record = [&](double current) {
    const double b = std::min(open_bound(current), incumbent);
    global_bound = std::max(global_bound, b);
    stats.incumbent_trace.push_back(incumbent);
    stats.bound_trace.push_back(global_bound);
  };
  auto prunable = [&](double bound) {
    return incumbent != kInf && detail::relative_gap(incumbent, bound) <= limits.relative_gap;
  };

  open.push(detail::BranchNode{-kInf, 0, order++, {},
                               root_basis ? std::make_shared<const std::vector<VarStatus>>(*root_basis) : nullptr});
  std::optional<detail::BranchNode> plunge;

  while (plunge || !open.empty()) {
    if (stats.nodes >= limits.node_limit || elapsed() > limits.time_limit_s) {
      truncated = true;
      break;
    }
    detail::BranchNode node;
    if (plunge) {
      node = std::move(*plunge);
      plunge.reset();
    } else {
      node = open.top();
      open.pop();
    }
    if (prunable(node.bound)) continue;

    lower = root_lower;
    upper = root_upper;
    for (const auto& c : node.changes) {
      lower[static_cast<std::size_t>(c.var)] = c.lower;
      upper[static_cast<std::size_t>(c.var)] = c.upper;
    }
    SimplexOptions lp_options = limits.lp;
    lp_options.time_limit_s = std::min(lp_options.time_limit_s, std::max(0.0, limits.time_limit_s - elapsed()));
    SolveResult relax = simplex.solve(lower, upper, node.basis.get(), lp_options);
    ++stats.nodes;
    stats.iterations += relax.stats.iterations;

    if (relax.status == SolveStatus::kUnbounded) {
      if (stats.nodes == 1) {
        best.status = SolveStatus::kUnbounded;
        stats.wall_seconds = elapsed();
        return best;
      }
      throw ModelError("solve_milp: unbounded relaxation below the root");
    }
    if (relax.status == SolveStatus::kLimitReached) {
      // The node stays unresolved; its parent bound still counts.
      open.push(std::move(node));
      truncated = true;
      record(kInf);
      break;
    }
    if (relax.status == SolveStatus::kInfeasible || prunable(relax.objective)) {
      record(kInf);
      continue;
    }

    const int j = most_fractional(relax.values, integral);
    if (j < 0) {
      if (relax.objective < incumbent) {
        incumbent = relax.objective;
        best.values = relax.values;
        for (int k : integral) {
          auto& v = best.values[static_cast<std::size_t>(k)];
          v = std::round(v);
        }
        best.objective = lp.evaluate(best.values);
        best.basis = relax.basis;
        stats.has_incumbent = true;
      }
      record(kInf);
      continue;
    }

    ++stats.branches;
    const double v = relax.values[static_cast<std::size_t>(j)];
    auto basis = std::make_shared<const std::vector<VarStatus>>(std::move(relax.basis));
    detail::BranchNode down{relax.objective, node.depth + 1, order++, node.changes, basis};
    down.changes.push_back({j, lower[static_cast<std::size_t>(j)], std::floor(v)});
    detail::BranchNode up{relax.objective, node.depth + 1, order++, std::move(node.changes), basis};
    up.changes.push_back({j, std::ceil(v), upper[static_cast<std::size_t>(j)]});

    // Plunge toward the nearer integer, queue the other child.
    if (v - std::floor(v) > 0.5) {
      open.push(std::move(down));
      plunge = std::move(up);
    } else {
      open.push(std::move(up));
      plunge = std::move(down);
    }
    record(relax.objective);
  }

  stats.wall_seconds = elapsed();
  if (!truncated) global_bound = std::max(global_bound, incumbent == kInf ? global_bound : incumbent);
  stats.lower_bound = std::min(global_bound, incumbent);
  if (incumbent == kInf) {
    best.status = truncated ? SolveStatus::kLimitReached : SolveStatus::kInfeasible;
    stats.gap = kInf;
    return best;
  }
  stats.gap = detail::relative_gap(incumbent, stats.lower_bound);
  const bool closed = !truncated || stats.gap <= limits.relative_gap;
  best.status = closed ? SolveStatus::kOptimal : SolveStatus::kLimitReached;
  return best;
}

}  // namespace amod::opt
