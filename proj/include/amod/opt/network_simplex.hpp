#pragma once

// Primal network simplex on a strongly feasible spanning tree with
// block-search pricing. Tree bookkeeping (parent/thread/successor lists)
// follows the classic LEMON layout.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "amod/core/errors.hpp"
#include "amod/opt/flow_network.hpp"

namespace amod::opt {

namespace detail {

class NetworkSimplex {
 public:
  explicit NetworkSimplex(const FlowNetwork& net) : net_(net) {}

  FlowSolution run() {
    const auto started = std::chrono::steady_clock::now();
    FlowSolution out;
    if (auto problems = net_.validate(); !problems.empty()) {
      throw ModelError("solve_min_cost_flow: " + problems.front());
    }
    init();
    out.flow.assign(static_cast<std::size_t>(arc_num_), 0);

    if (sum_supply_ != 0) {
      out.status = SolveStatus::kInfeasible;
      for (int u = 0; u < node_num_; ++u) out.infeasible_cut.push_back(u);
      out.stats.wall_seconds = elapsed(started);
      return out;
    }

    const bool bounded = pivot_loop(out.stats.iterations);
    out.stats.wall_seconds = elapsed(started);
    if (!bounded) {
      out.status = SolveStatus::kUnbounded;
      return out;
    }

    for (int e = 0; e < arc_num_; ++e) out.flow[static_cast<std::size_t>(e)] = flow_[e] + net_.arc(e).lower;
    out.potential.assign(pi_.begin(), pi_.begin() + node_num_);

    bool artificial_used = false;
    for (int e = arc_num_; e < all_arc_num_; ++e) {
      if (flow_[e] != 0) artificial_used = true;
    }
    if (artificial_used) {
      out.status = SolveStatus::kInfeasible;
      out.infeasible_cut = infeasibility_witness();
      return out;
    }

    out.status = SolveStatus::kOptimal;
    double objective = 0.0;
    for (int e = 0; e < arc_num_; ++e) {
      objective += net_.arc(e).cost * static_cast<double>(out.flow[static_cast<std::size_t>(e)]);
    }
    out.objective = objective;
    return out;
  }

 private:
  static constexpr int kStateUpper = -1;
  static constexpr int kStateTree = 0;
  static constexpr int kStateLower = 1;
  static constexpr int kDirUp = 1;
  static constexpr int kDirDown = -1;
  static constexpr std::int64_t kInf = kInfiniteCapacity;

  static double elapsed(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
  }

  void init() {
    node_num_ = net_.node_count();
    arc_num_ = net_.arc_count();
    all_arc_num_ = arc_num_ + node_num_;
    const int total_nodes = node_num_ + 1;

    source_.assign(all_arc_num_, 0);
    target_.assign(all_arc_num_, 0);
    cap_.assign(all_arc_num_, 0);
    cost_.assign(all_arc_num_, 0.0);
    flow_.assign(all_arc_num_, 0);
    state_.assign(all_arc_num_, kStateLower);
    supply_.assign(total_nodes, 0);

    parent_.assign(total_nodes, -1);
    pred_.assign(total_nodes, -1);
    thread_.assign(total_nodes, 0);
    rev_thread_.assign(total_nodes, 0);
    succ_num_.assign(total_nodes, 0);
    last_succ_.assign(total_nodes, 0);
    pred_dir_.assign(total_nodes, kDirUp);
    pi_.assign(total_nodes, 0.0);

    double max_cost = 0.0;
    for (int e = 0; e < arc_num_; ++e) {
      const auto& a = net_.arc(e);
      source_[e] = a.tail;
      target_[e] = a.head;
      cost_[e] = a.cost;
      cap_[e] = a.upper == kInf ? kInf : a.upper - a.lower;
      max_cost = std::max(max_cost, std::abs(a.cost));
    }
    sum_supply_ = 0;
    for (int u = 0; u < node_num_; ++u) {
      supply_[u] = net_.balances()[static_cast<std::size_t>(u)];
    }
    for (int e = 0; e < arc_num_; ++e) {
      const auto lower = net_.arc(e).lower;
      if (lower != 0) {
        supply_[source_[e]] -= lower;
        supply_[target_[e]] += lower;
      }
    }
    for (int u = 0; u < node_num_; ++u) sum_supply_ += supply_[u];

    art_cost_ = (max_cost + 1.0) * static_cast<double>(node_num_ + 1);
    // Entering threshold scaled to the cost magnitude.
    epsilon_ = 1e-12 * (max_cost + 1.0) * static_cast<double>(node_num_ + 1);

    root_ = node_num_;
    parent_[root_] = -1;
    pred_[root_] = -1;
    thread_[root_] = 0;
    rev_thread_[0] = root_;
    succ_num_[root_] = node_num_ + 1;
    last_succ_[root_] = root_ - 1;
    supply_[root_] = -sum_supply_;
    pi_[root_] = 0.0;

    for (int u = 0, e = arc_num_; u != node_num_; ++u, ++e) {
      parent_[u] = root_;
      pred_[u] = e;
      thread_[u] = u + 1;
      rev_thread_[u + 1] = u;
      succ_num_[u] = 1;
      last_succ_[u] = u;
      cap_[e] = kInf;
      state_[e] = kStateTree;
      if (supply_[u] >= 0) {
        pred_dir_[u] = kDirUp;
        pi_[u] = 0.0;
        source_[e] = u;
        target_[e] = root_;
        flow_[e] = supply_[u];
        cost_[e] = 0.0;
      } else {
        pred_dir_[u] = kDirDown;
        pi_[u] = art_cost_;
        source_[e] = root_;
        target_[e] = u;
        flow_[e] = -supply_[u];
        cost_[e] = art_cost_;
      }
    }

    block_size_ = std::max(10, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(arc_num_)))));
    next_arc_ = 0;
  }

  double reduced(int e) const { return cost_[e] + pi_[source_[e]] - pi_[target_[e]]; }

  bool find_entering_arc() {
    if (arc_num_ == 0) return false;
    double best = -epsilon_;
    int cnt = block_size_;
    int e = next_arc_;
    bool found = false;
    for (int scanned = 0; scanned < arc_num_; ++scanned) {
      const double c = state_[e] * reduced(e);
      if (c < best) {
        best = c;
        in_arc_ = e;
        found = true;
      }
      if (++e == arc_num_) e = 0;
      if (--cnt == 0) {
        if (found) break;
        cnt = block_size_;
      }
    }
    if (!found) return false;
    next_arc_ = e;
    return true;
  }

  void find_join_node() {
    int u = source_[in_arc_];
    int v = target_[in_arc_];
    while (u != v) {
      if (succ_num_[u] < succ_num_[v]) {
        u = parent_[u];
      } else {
        v = parent_[v];
      }
    }
    join_ = u;
  }

  bool find_leaving_arc() {
    int first, second;
    if (state_[in_arc_] == kStateLower) {
      first = source_[in_arc_];
      second = target_[in_arc_];
    } else {
      first = target_[in_arc_];
      second = source_[in_arc_];
    }
    delta_ = cap_[in_arc_];
    int result = 0;
    for (int u = first; u != join_; u = parent_[u]) {
      const int e = pred_[u];
      std::int64_t d = flow_[e];
      if (pred_dir_[u] == kDirDown) d = cap_[e] >= kInf ? kInf : cap_[e] - d;
      if (d < delta_) {
        delta_ = d;
        u_out_ = u;
        result = 1;
      }
    }
    for (int u = second; u != join_; u = parent_[u]) {
      const int e = pred_[u];
      std::int64_t d = flow_[e];
      if (pred_dir_[u] == kDirUp) d = cap_[e] >= kInf ? kInf : cap_[e] - d;
      if (d <= delta_) {
        delta_ = d;
        u_out_ = u;
        result = 2;
      }
    }
    if (result == 1) {
      u_in_ = first;
      v_in_ = second;
    } else {
      u_in_ = second;
      v_in_ = first;
    }
    return result != 0;
  }

  void change_flow(bool change) {
    if (delta_ > 0) {
      const std::int64_t val = state_[in_arc_] * delta_;
      flow_[in_arc_] += val;
      for (int u = source_[in_arc_]; u != join_; u = parent_[u]) flow_[pred_[u]] -= pred_dir_[u] * val;
      for (int u = target_[in_arc_]; u != join_; u = parent_[u]) flow_[pred_[u]] += pred_dir_[u] * val;
    }
    if (change) {
      state_[in_arc_] = kStateTree;
      state_[pred_[u_out_]] = flow_[pred_[u_out_]] == 0 ? kStateLower : kStateUpper;
    } else {
      state_[in_arc_] = -state_[in_arc_];
    }
  }

  void update_tree_structure() {
    const int old_rev_thread = rev_thread_[u_out_];
    const int old_succ_num = succ_num_[u_out_];
    const int old_last_succ = last_succ_[u_out_];
    v_out_ = parent_[u_out_];

    if (u_in_ == u_out_) {
      parent_[u_in_] = v_in_;
      pred_[u_in_] = in_arc_;
      pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kDirUp : kDirDown;
      if (thread_[v_in_] != u_out_) {
        int after = thread_[old_last_succ];
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
        after = thread_[v_in_];
        thread_[v_in_] = u_out_;
        rev_thread_[u_out_] = v_in_;
        thread_[old_last_succ] = after;
        rev_thread_[after] = old_last_succ;
      }
    } else {
      const int thread_continue = old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];
      int stem = u_in_;
      int par_stem = v_in_;
      int next_stem;
      int last = last_succ_[u_in_];
      int before, after = thread_[last];
      thread_[v_in_] = u_in_;
      dirty_revs_.clear();
      dirty_revs_.push_back(v_in_);
      while (stem != u_out_) {
        next_stem = parent_[stem];
        thread_[last] = next_stem;
        dirty_revs_.push_back(last);
        before = rev_thread_[stem];
        thread_[before] = after;
        rev_thread_[after] = before;
        parent_[stem] = par_stem;
        par_stem = stem;
        stem = next_stem;
        last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem] : last_succ_[stem];
        after = thread_[last];
      }
      parent_[u_out_] = par_stem;
      thread_[last] = thread_continue;
      rev_thread_[thread_continue] = last;
      last_succ_[u_out_] = last;

      if (old_rev_thread != v_in_) {
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
      }
      for (int u : dirty_revs_) rev_thread_[thread_[u]] = u;

      int tmp_sc = 0;
      const int tmp_ls = last_succ_[u_out_];
      for (int u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
        pred_[u] = pred_[p];
        pred_dir_[u] = -pred_dir_[p];
        tmp_sc += succ_num_[u] - succ_num_[p];
        succ_num_[u] = tmp_sc;
        last_succ_[p] = tmp_ls;
      }
      pred_[u_in_] = in_arc_;
      pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kDirUp : kDirDown;
      succ_num_[u_in_] = old_succ_num;
    }

    const int up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
    const int last_succ_out = last_succ_[u_out_];
    for (int u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u]) last_succ_[u] = last_succ_out;

    if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
      for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u]) {
        last_succ_[u] = old_rev_thread;
      }
    } else if (last_succ_out != old_last_succ) {
      for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u]) {
        last_succ_[u] = last_succ_out;
      }
    }

    for (int u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
    for (int u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
  }

  void update_potential() {
    const double sigma = pi_[v_in_] - pi_[u_in_] - pred_dir_[u_in_] * cost_[in_arc_];
    const int end = thread_[last_succ_[u_in_]];
    for (int u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
  }

  bool pivot_loop(std::int64_t& iterations) {
    while (find_entering_arc()) {
      ++iterations;
      find_join_node();
      const bool change = find_leaving_arc();
      if (delta_ >= kInf) return false;
      change_flow(change);
      if (change) {
        update_tree_structure();
        update_potential();
      }
    }
    return true;
  }

  // Nodes reachable in the residual graph from nodes whose supply could not
  // be routed without artificial arcs.
  std::vector<int> infeasibility_witness() const {
    std::vector<std::int64_t> excess(static_cast<std::size_t>(node_num_), 0);
    for (int u = 0; u < node_num_; ++u) excess[u] = supply_[u];
    for (int e = 0; e < arc_num_; ++e) {
      excess[source_[e]] -= flow_[e];
      excess[target_[e]] += flow_[e];
    }
    std::vector<std::vector<int>> out(node_num_), in(node_num_);
    for (int e = 0; e < arc_num_; ++e) {
      out[source_[e]].push_back(e);
      in[target_[e]].push_back(e);
    }
    std::vector<char> seen(static_cast<std::size_t>(node_num_), 0);
    std::queue<int> queue;
    for (int u = 0; u < node_num_; ++u) {
      if (excess[u] > 0) {
        seen[u] = 1;
        queue.push(u);
      }
    }
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop();
      for (int e : out[u]) {
        if ((cap_[e] >= kInf || flow_[e] < cap_[e]) && !seen[target_[e]]) {
          seen[target_[e]] = 1;
          queue.push(target_[e]);
        }
      }
      for (int e : in[u]) {
        if (flow_[e] > 0 && !seen[source_[e]]) {
          seen[source_[e]] = 1;
          queue.push(source_[e]);
        }
      }
    }
    std::vector<int> cut;
    for (int u = 0; u < node_num_; ++u) {
      if (seen[u]) cut.push_back(u);
    }
    return cut;
  }

  const FlowNetwork& net_;
  int node_num_ = 0;
  int arc_num_ = 0;
  int all_arc_num_ = 0;
  int root_ = 0;
  std::int64_t sum_supply_ = 0;
  double art_cost_ = 0.0;
  double epsilon_ = 0.0;

  std::vector<int> source_, target_;
  std::vector<std::int64_t> cap_, flow_, supply_;
  std::vector<double> cost_, pi_;
  std::vector<int> state_;
  std::vector<int> parent_, pred_, thread_, rev_thread_, succ_num_, last_succ_, pred_dir_;
  std::vector<int> dirty_revs_;

  int block_size_ = 10;
  int next_arc_ = 0;
  int in_arc_ = 0, join_ = 0, u_in_ = 0, v_in_ = 0, u_out_ = 0, v_out_ = 0;
  std::int64_t delta_ = 0;
};

}  // namespace detail

inline FlowSolution solve_min_cost_flow(const FlowNetwork& net) {
  return detail::NetworkSimplex(net).run();
}

}  // namespace amod::opt
