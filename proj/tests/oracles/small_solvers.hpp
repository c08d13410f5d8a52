#pragma once

// Brute-force references for tiny LPs, MILPs and flow problems.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "amod/opt/flow_network.hpp"
#include "amod/opt/sparse_lp.hpp"

namespace oracle {

// Dense view of a bounded LP: rows A x (sense) b plus finite column bounds.
struct DenseLp {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  std::vector<amod::opt::RowSense> sense;
  Eigen::VectorXd c, lo, up;
};

inline DenseLp dense(const amod::opt::SparseLinearProgram& lp) {
  DenseLp d;
  const int m = lp.rows(), n = lp.columns();
  d.a = Eigen::MatrixXd::Zero(m, n);
  for (const auto& e : lp.entries) d.a(e.row, e.col) += e.value;
  d.b = Eigen::Map<const Eigen::VectorXd>(lp.rhs.data(), m);
  d.sense = lp.sense;
  d.c = Eigen::Map<const Eigen::VectorXd>(lp.objective.data(), n);
  d.lo = Eigen::Map<const Eigen::VectorXd>(lp.lower.data(), n);
  d.up = Eigen::Map<const Eigen::VectorXd>(lp.upper.data(), n);
  return d;
}

inline bool satisfies(const DenseLp& d, const Eigen::VectorXd& x, double tol = 1e-7) {
  for (int j = 0; j < x.size(); ++j) {
    if (x(j) < d.lo(j) - tol || x(j) > d.up(j) + tol) return false;
  }
  const Eigen::VectorXd ax = d.a * x;
  for (int r = 0; r < ax.size(); ++r) {
    switch (d.sense[static_cast<std::size_t>(r)]) {
      case amod::opt::RowSense::kEqual:
        if (std::abs(ax(r) - d.b(r)) > tol) return false;
        break;
      case amod::opt::RowSense::kLessEqual:
        if (ax(r) > d.b(r) + tol) return false;
        break;
      case amod::opt::RowSense::kGreaterEqual:
        if (ax(r) < d.b(r) - tol) return false;
        break;
    }
  }
  return true;
}

// Minimum over all vertices: every choice of n tight constraints among rows
// and finite bounds. Empty when infeasible. Bounds must be finite.
inline std::optional<double> lp_by_vertices(const amod::opt::SparseLinearProgram& lp) {
  const DenseLp d = dense(lp);
  const int m = static_cast<int>(d.a.rows()), n = static_cast<int>(d.a.cols());
  // Candidate tight constraints: rows, then lower bounds, then upper bounds.
  const int total = m + 2 * n;
  auto row_of = [&](int k, Eigen::RowVectorXd& g, double& h) {
    g = Eigen::RowVectorXd::Zero(n);
    if (k < m) {
      g = d.a.row(k);
      h = d.b(k);
    } else if (k < m + n) {
      g(k - m) = 1.0;
      h = d.lo(k - m);
    } else {
      g(k - m - n) = 1.0;
      h = d.up(k - m - n);
    }
  };
  std::optional<double> best;
  std::vector<int> pick;
  std::function<void(int)> rec = [&](int from) {
    if (static_cast<int>(pick.size()) == n) {
      Eigen::MatrixXd g(n, n);
      Eigen::VectorXd h(n);
      for (int r = 0; r < n; ++r) {
        Eigen::RowVectorXd row;
        double rhs = 0.0;
        row_of(pick[static_cast<std::size_t>(r)], row, rhs);
        g.row(r) = row;
        h(r) = rhs;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
      if (lu.rank() < n) return;
      const Eigen::VectorXd x = lu.solve(h);
      if (!satisfies(d, x)) return;
      const double v = d.c.dot(x);
      if (!best || v < *best) best = v;
      return;
    }
    for (int k = from; k < total; ++k) {
      pick.push_back(k);
      rec(k + 1);
      pick.pop_back();
    }
  };
  if (n == 0) return satisfies(d, Eigen::VectorXd(0)) ? std::optional<double>(0.0) : std::nullopt;
  rec(0);
  return best;
}

// Minimum over the integer points of the (finite) bound box.
inline std::optional<double> milp_by_enumeration(const amod::opt::SparseLinearProgram& lp) {
  const DenseLp d = dense(lp);
  const int n = static_cast<int>(d.a.cols());
  Eigen::VectorXd x(n);
  std::optional<double> best;
  std::function<void(int)> rec = [&](int j) {
    if (j == n) {
      if (!satisfies(d, x)) return;
      const double v = d.c.dot(x);
      if (!best || v < *best) best = v;
      return;
    }
    for (double v = std::ceil(d.lo(j)); v <= d.up(j) + 1e-9; v += 1.0) {
      x(j) = v;
      rec(j + 1);
    }
  };
  rec(0);
  return best;
}

// Min-cost flow by trying every integral flow within [lower, cap] per arc.
inline std::optional<double> flow_by_enumeration(const amod::opt::FlowNetwork& net, std::int64_t cap) {
  const int arcs = net.arc_count();
  std::vector<std::int64_t> f(static_cast<std::size_t>(arcs), 0);
  std::optional<double> best;
  std::function<void(int)> rec = [&](int k) {
    if (k == arcs) {
      std::vector<std::int64_t> excess = net.balances();
      double cost = 0.0;
      for (int a = 0; a < arcs; ++a) {
        const auto& arc = net.arc(a);
        excess[static_cast<std::size_t>(arc.tail)] -= f[static_cast<std::size_t>(a)];
        excess[static_cast<std::size_t>(arc.head)] += f[static_cast<std::size_t>(a)];
        cost += arc.cost * static_cast<double>(f[static_cast<std::size_t>(a)]);
      }
      for (auto e : excess) {
        if (e != 0) return;
      }
      if (!best || cost < *best) best = cost;
      return;
    }
    const auto& arc = net.arc(k);
    for (auto v = arc.lower; v <= std::min(arc.upper, cap); ++v) {
      f[static_cast<std::size_t>(k)] = v;
      rec(k + 1);
    }
  };
  rec(0);
  return best;
}

// Transportation: minimum travel cost moving min(total supply, total demand)
// units from supply to demand regions; every assignment enumerated.
inline double transport_by_enumeration(const std::vector<std::int64_t>& supply, const std::vector<std::int64_t>& demand,
                                       const std::function<double(int, int)>& cost) {
  const int n = static_cast<int>(supply.size());
  std::int64_t s = 0, d = 0;
  for (auto v : supply) s += v;
  for (auto v : demand) d += v;
  const std::int64_t moved = std::min(s, d);
  std::vector<std::int64_t> x(static_cast<std::size_t>(n * n), 0);
  double best = std::numeric_limits<double>::infinity();
  std::function<void(int, std::vector<std::int64_t>&, std::vector<std::int64_t>&, std::int64_t, double)> rec =
      [&](int k, std::vector<std::int64_t>& out, std::vector<std::int64_t>& in, std::int64_t total, double c) {
        if (k == n * n) {
          if (total == moved) best = std::min(best, c);
          return;
        }
        const int i = k / n, j = k % n;
        const auto room = std::min(supply[static_cast<std::size_t>(i)] - out[static_cast<std::size_t>(i)],
                                   demand[static_cast<std::size_t>(j)] - in[static_cast<std::size_t>(j)]);
        for (std::int64_t v = 0; v <= (i == j ? 0 : room); ++v) {
          out[static_cast<std::size_t>(i)] += v;
          in[static_cast<std::size_t>(j)] += v;
          rec(k + 1, out, in, total + v, c + cost(i, j) * static_cast<double>(v));
          out[static_cast<std::size_t>(i)] -= v;
          in[static_cast<std::size_t>(j)] -= v;
        }
      };
  std::vector<std::int64_t> out(static_cast<std::size_t>(n), 0), in(static_cast<std::size_t>(n), 0);
  rec(0, out, in, 0, 0.0);
  return best;
}

}  // namespace oracle
