#pragma once

// Exhaustive MPC oracle: every integral choice of pickups of outstanding
// customers, served trips and empty moves, step by step, memoised on the
// arrival pipeline and the customers still outstanding.

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include "amod/core/scenario.hpp"
#include "amod/forecast/forecast.hpp"
#include "amod/mpc/mpc.hpp"
#include "oracles/offline_dp.hpp"

namespace oracle {

class MpcEnumerator {
 public:
  MpcEnumerator(const amod::StateObservation& obs, const amod::Forecast& fc, const amod::Scenario& s, int horizon)
      : obs_(obs), fc_(fc), s_(s), n_(s.region_count()), horizon_(horizon) {
    for (amod::Step t = 1; t <= horizon_; ++t) {
      for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) span_ = std::max(span_, s.travel(i, j, obs.epoch_t0 + t));
      }
    }
    span_ += 1;
    for (const auto& [od, count] : obs.outstanding) pairs_.push_back(od);
  }

  double solve() {
    std::vector<int> pipe(static_cast<std::size_t>(span_ * n_), 0);
    std::vector<int> left;
    for (const auto& od : pairs_) left.push_back(static_cast<int>(obs_.outstanding_count(od.first, od.second)));
    return value(1, pipe, left);
  }

 private:
  int forecast(int i, int j, amod::Step t) const { return t <= fc_.t_forward ? fc_.get(i, j, t) : 0; }

  double value(amod::Step t, const std::vector<int>& pipe, const std::vector<int>& left) {
    if (t > horizon_) {
      for (int l : left) {
        if (l != 0) return std::numeric_limits<double>::infinity();
      }
      return 0.0;
    }
    auto key = std::make_tuple(t, pipe, left);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const amod::Step abs = obs_.epoch_t0 + t;

    std::vector<int> base(pipe.begin() + n_, pipe.end());
    base.resize(pipe.size(), 0);
    double best = std::numeric_limits<double>::infinity();

    // Pickup counts for each outstanding pair at this step.
    std::function<void(std::size_t, std::vector<int>&, std::vector<int>&)> pick =
        [&](std::size_t k, std::vector<int>& w, std::vector<int>& rest) {
          if (k == pairs_.size()) {
            best = std::min(best, serve(t, abs, pipe, base, w, rest));
            return;
          }
          for (int c = 0; c <= left[k]; ++c) {
            w.push_back(c);
            rest.push_back(left[k] - c);
            pick(k + 1, w, rest);
            w.pop_back();
            rest.pop_back();
          }
        };
    std::vector<int> w, rest;
    pick(0, w, rest);
    memo_.emplace(std::move(key), best);
    return best;
  }

  // Regions in turn: trips served per destination, then the leftover split.
  double serve(amod::Step t, amod::Step abs, const std::vector<int>& pipe, const std::vector<int>& base,
               const std::vector<int>& w, const std::vector<int>& rest) {
    std::vector<int> want(static_cast<std::size_t>(n_ * n_), 0);
    double fixed = 0.0;
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) want[static_cast<std::size_t>(i * n_ + j)] = forecast(i, j, t);
    }
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      const auto [i, j] = pairs_[k];
      want[static_cast<std::size_t>(i * n_ + j)] += w[k];
      fixed += s_.costs.wait_rate(i, j, abs) * t * w[k];
    }
    auto arrive = [&](std::vector<int>& next, int j, int tau, int count) {
      if (t + tau <= horizon_) next[static_cast<std::size_t>((tau - 1) * n_ + j)] += count;
    };
    double best = std::numeric_limits<double>::infinity();
    std::function<void(int, std::vector<int>&, double)> region = [&](int i, std::vector<int>& next, double cost) {
      if (i == n_) {
        best = std::min(best, cost + value(t + 1, next, rest));
        return;
      }
      const int avail = pipe[static_cast<std::size_t>(i)] + static_cast<int>(obs_.supply(i, t));
      std::function<void(int, int, std::vector<int>&, double)> trips = [&](int j, int used, std::vector<int>& nn,
                                                                           double c) {
        if (j == n_) {
          std::vector<int> split;
          compositions(avail - used, n_, split, [&] {
            std::vector<int> n2 = nn;
            double c2 = c;
            for (int d = 0; d < n_; ++d) {
              const int k = split[static_cast<std::size_t>(d)];
              if (k == 0) continue;
              c2 += s_.costs.rebalance(i, d, abs) * k;
              arrive(n2, d, s_.travel(i, d, abs), k);
            }
            region(i + 1, n2, c2);
          });
          return;
        }
        const int demand = want[static_cast<std::size_t>(i * n_ + j)];
        for (int x = 0; x <= std::min(demand, avail - used); ++x) {
          std::vector<int> n2 = nn;
          arrive(n2, j, s_.travel(i, j, abs), x);
          trips(j + 1, used + x, n2, c + s_.costs.drop(i, j, abs) * (demand - x));
        }
      };
      trips(0, 0, next, cost);
    };
    std::vector<int> next = base;
    region(0, next, fixed);
    return best;
  }

  const amod::StateObservation& obs_;
  const amod::Forecast& fc_;
  const amod::Scenario& s_;
  int n_;
  int horizon_;
  int span_ = 1;
  std::vector<std::pair<int, int>> pairs_;
  std::map<std::tuple<amod::Step, std::vector<int>, std::vector<int>>, double> memo_;
};

inline double solve_mpc_exhaustive(const amod::StateObservation& obs, const amod::Forecast& fc,
                                   const amod::Scenario& s, int horizon) {
  return MpcEnumerator(obs, fc, s, horizon).solve();
}

}  // namespace oracle
