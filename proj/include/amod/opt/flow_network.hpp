#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "amod/opt/types.hpp"

namespace amod::opt {

inline constexpr std::int64_t kInfiniteCapacity = std::numeric_limits<std::int64_t>::max();

struct FlowArc {
  int tail = 0;
  int head = 0;
  std::int64_t lower = 0;
  std::int64_t upper = kInfiniteCapacity;
  double cost = 0.0;
};

// Directed network with integer node balances (positive = supply) and
// bounded arcs. Flow conservation: outflow - inflow = balance at every node.
class FlowNetwork {
 public:
  int add_node(std::int64_t balance = 0) {
    balance_.push_back(balance);
    return static_cast<int>(balance_.size()) - 1;
  }

  int add_arc(int tail, int head, std::int64_t lower, std::int64_t upper, double cost) {
    arcs_.push_back(FlowArc{tail, head, lower, upper, cost});
    return static_cast<int>(arcs_.size()) - 1;
  }

  void set_balance(int node, std::int64_t value) { balance_.at(static_cast<std::size_t>(node)) = value; }
  void add_balance(int node, std::int64_t delta) { balance_.at(static_cast<std::size_t>(node)) += delta; }

  int node_count() const { return static_cast<int>(balance_.size()); }
  int arc_count() const { return static_cast<int>(arcs_.size()); }
  const std::vector<std::int64_t>& balances() const { return balance_; }
  const std::vector<FlowArc>& arcs() const { return arcs_; }
  const FlowArc& arc(int k) const { return arcs_[static_cast<std::size_t>(k)]; }
  FlowArc& arc(int k) { return arcs_[static_cast<std::size_t>(k)]; }

  std::vector<std::string> validate() const {
    std::vector<std::string> problems;
    const int n = node_count();
    for (std::size_t k = 0; k < arcs_.size(); ++k) {
      const auto& a = arcs_[k];
      if (a.tail < 0 || a.tail >= n || a.head < 0 || a.head >= n) {
        problems.push_back("arc " + std::to_string(k) + " has an endpoint outside the node set");
      }
      if (a.lower < 0 || a.lower > a.upper) {
        problems.push_back("arc " + std::to_string(k) + " needs 0 <= lower <= upper");
      }
      if (!std::isfinite(a.cost)) problems.push_back("arc " + std::to_string(k) + " has a non-finite cost");
    }
    return problems;
  }

 private:
  std::vector<std::int64_t> balance_;
  std::vector<FlowArc> arcs_;
};

struct FlowSolution {
  SolveStatus status = SolveStatus::kInfeasible;
  double objective = 0.0;
  std::vector<std::int64_t> flow;
  // Node potentials; reduced cost of arc (u, v) is cost + potential[u] - potential[v].
  std::vector<double> potential;
  // On infeasibility: node set S whose net balance cannot leave it, i.e.
  // balance(S) > upper(out of S) - lower(into S). When the balances do not
  // sum to zero the whole node set is reported.
  std::vector<int> infeasible_cut;
  SolverStats stats;

  double reduced_cost(const FlowNetwork& net, int arc) const {
    const auto& a = net.arc(arc);
    return a.cost + potential[static_cast<std::size_t>(a.tail)] - potential[static_cast<std::size_t>(a.head)];
  }
};

}  // namespace amod::opt
