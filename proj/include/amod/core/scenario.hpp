#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "amod/core/errors.hpp"
#include "amod/core/time_grid.hpp"

namespace amod {

// Regions are addressed internally by dense index 0..N-1; the opaque ids
// only matter at the file boundary.
class RegionSet {
 public:
  RegionSet() = default;
  explicit RegionSet(std::vector<std::string> ids) : ids_(std::move(ids)) {
    for (std::size_t k = 0; k < ids_.size(); ++k) {
      index_.emplace(ids_[k], static_cast<int>(k));
    }
  }

  static RegionSet numbered(int count) {
    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int k = 0; k < count; ++k) ids.push_back(std::to_string(k + 1));
    return RegionSet(std::move(ids));
  }

  int size() const { return static_cast<int>(ids_.size()); }
  const std::string& id(int index) const { return ids_.at(static_cast<std::size_t>(index)); }
  const std::vector<std::string>& ids() const { return ids_; }

  std::optional<int> index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool unique() const { return index_.size() == ids_.size(); }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, int> index_;
};

// tau(i, j, t): whole planning intervals to travel from i to j when
// departing at step t. Stored either time-invariant (one layer) or with one
// layer per step; lookups past the last layer reuse it.
class TravelTimeMatrix {
 public:
  TravelTimeMatrix() = default;

  TravelTimeMatrix(int regions, std::vector<int> steps, std::vector<double> seconds = {})
      : TravelTimeMatrix(regions, 1, std::move(steps), std::move(seconds)) {}

  TravelTimeMatrix(int regions, int layers, std::vector<int> steps, std::vector<double> seconds)
      : n_(regions), layers_(layers), steps_(std::move(steps)), seconds_(std::move(seconds)) {
    if (n_ < 0 || layers_ < 1 ||
        steps_.size() != static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_) *
                             static_cast<std::size_t>(layers_)) {
      throw InputError("TravelTimeMatrix: dimension mismatch");
    }
    if (!seconds_.empty() && seconds_.size() != static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_)) {
      throw InputError("TravelTimeMatrix: seconds matrix must be N x N");
    }
  }

  // Uniform matrix: off-diagonal travel of `steps` intervals, idle arcs of one.
  static TravelTimeMatrix uniform(int regions, int steps) {
    std::vector<int> tau(static_cast<std::size_t>(regions) * static_cast<std::size_t>(regions), steps);
    for (int i = 0; i < regions; ++i) tau[static_cast<std::size_t>(i * regions + i)] = 1;
    return TravelTimeMatrix(regions, std::move(tau));
  }

  int regions() const { return n_; }
  int layers() const { return layers_; }

  int operator()(int i, int j, Step t) const { return steps_[offset(i, j, t)]; }

  void set(int i, int j, Step t, int value) { steps_[offset(i, j, t)] = value; }
  void set_all_steps(int i, int j, int value) {
    for (int layer = 1; layer <= layers_; ++layer) set(i, j, layer, value);
  }

  bool has_seconds() const { return !seconds_.empty(); }

  // Travel duration used for rebalancing moves in the simulator.
  double seconds(int i, int j, double delta_t_s) const {
    if (!seconds_.empty()) return seconds_[static_cast<std::size_t>(i * n_ + j)];
    return static_cast<double>((*this)(i, j, 1)) * delta_t_s;
  }

  int max_steps() const {
    return steps_.empty() ? 1 : *std::max_element(steps_.begin(), steps_.end());
  }

  const std::vector<int>& raw_steps() const { return steps_; }
  const std::vector<double>& raw_seconds() const { return seconds_; }

 private:
  std::size_t offset(int i, int j, Step t) const {
    const int layer = std::clamp(t, 1, layers_) - 1;
    return (static_cast<std::size_t>(layer) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i)) *
               static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(j);
  }

  int n_ = 0;
  int layers_ = 1;
  std::vector<int> steps_;
  std::vector<double> seconds_;
};

struct DemandKey {
  Step t = 1;
  int origin = 0;
  int destination = 0;

  friend auto operator<=>(const DemandKey&, const DemandKey&) = default;
};

// Sparse customer counts lambda(i, j, t); absent entries are zero.
class DemandSet {
 public:
  using Map = std::map<DemandKey, int>;

  void add(int origin, int destination, Step t, int count = 1) {
    if (count == 0) return;
    int& slot = counts_[DemandKey{t, origin, destination}];
    slot += count;
    if (slot == 0) counts_.erase(DemandKey{t, origin, destination});
  }

  void set(int origin, int destination, Step t, int count) {
    if (count == 0) {
      counts_.erase(DemandKey{t, origin, destination});
    } else {
      counts_[DemandKey{t, origin, destination}] = count;
    }
  }

  int get(int origin, int destination, Step t) const {
    auto it = counts_.find(DemandKey{t, origin, destination});
    return it == counts_.end() ? 0 : it->second;
  }

  long long total() const {
    long long sum = 0;
    for (const auto& [key, count] : counts_) sum += count;
    return sum;
  }

  bool empty() const { return counts_.empty(); }
  std::size_t cells() const { return counts_.size(); }
  const Map& entries() const { return counts_; }

  // Entries with from <= t <= to, in key order.
  template <typename Fn>
  void for_each_in(Step from, Step to, Fn&& fn) const {
    for (auto it = counts_.lower_bound(DemandKey{from, -1, -1});
         it != counts_.end() && it->first.t <= to; ++it) {
      fn(it->first, it->second);
    }
  }

  Step last_step() const { return counts_.empty() ? 0 : counts_.rbegin()->first.t; }

  friend bool operator==(const DemandSet&, const DemandSet&) = default;

 private:
  Map counts_;
};

struct CostParams {
  double idle_per_step = 1.0;  // c^r_ii: ownership/parking per interval
  double move_per_step = 1.0;  // c^r_ij = move_per_step * tau_ij
  double drop = 1e4;           // c^d for an unserved predicted customer
  // Per-interval waiting rate; defaults to drop / planning horizon so that
  // waiting the full horizon costs as much as dropping.
  std::optional<double> wait_per_step;
};

// Cost coefficients c^r_ijt, c^w_ijt and c^d_ijt. Stored per layer in the same
// way as the travel matrix.
class CostModel {
 public:
  CostModel() = default;

  CostModel(int regions, int layers, std::vector<double> rebalance, std::vector<double> drop,
            std::vector<double> wait_rate)
      : n_(regions),
        layers_(layers),
        rebalance_(std::move(rebalance)),
        drop_(std::move(drop)),
        wait_rate_(std::move(wait_rate)) {
    const auto expected =
        static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_) * static_cast<std::size_t>(layers_);
    if (rebalance_.size() != expected || drop_.size() != expected || wait_rate_.size() != expected) {
      throw InputError("CostModel: dimension mismatch");
    }
  }

  // Rebalancing cost proportional to travel time, idling at a flat rate.
  static CostModel proportional(const TravelTimeMatrix& travel, const CostParams& params,
                                int planning_horizon) {
    const int n = travel.regions();
    const int layers = travel.layers();
    const auto size =
        static_cast<std::size_t>(n) * static_cast<std::size_t>(n) * static_cast<std::size_t>(layers);
    std::vector<double> reb(size), drop(size, params.drop), wait(size);
    const double rate = params.wait_per_step.value_or(params.drop / std::max(planning_horizon, 1));
    std::fill(wait.begin(), wait.end(), rate);
    for (int layer = 1; layer <= layers; ++layer) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const auto k = (static_cast<std::size_t>(layer - 1) * n + i) * n + j;
          reb[k] = i == j ? params.idle_per_step : params.move_per_step * travel(i, j, layer);
        }
      }
    }
    return CostModel(n, layers, std::move(reb), std::move(drop), std::move(wait));
  }

  int regions() const { return n_; }
  int layers() const { return layers_; }

  double rebalance(int i, int j, Step t) const { return rebalance_[offset(i, j, t)]; }
  double drop(int i, int j, Step t) const { return drop_[offset(i, j, t)]; }
  // Cost of an outstanding customer picked up at relative step t (a wait of
  // t intervals).
  double wait(int i, int j, Step t) const { return wait_rate_[offset(i, j, t)] * t; }
  double wait_rate(int i, int j, Step t) const { return wait_rate_[offset(i, j, t)]; }

  void set_rebalance(int i, int j, Step t, double value) { rebalance_[offset(i, j, t)] = value; }
  void set_drop(int i, int j, Step t, double value) { drop_[offset(i, j, t)] = value; }
  void set_wait_rate(int i, int j, Step t, double value) { wait_rate_[offset(i, j, t)] = value; }

  const std::vector<double>& raw_rebalance() const { return rebalance_; }
  const std::vector<double>& raw_drop() const { return drop_; }
  const std::vector<double>& raw_wait_rate() const { return wait_rate_; }

 private:
  std::size_t offset(int i, int j, Step t) const {
    const int layer = std::clamp(t, 1, layers_) - 1;
    return (static_cast<std::size_t>(layer) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i)) *
               static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(j);
  }

  int n_ = 0;
  int layers_ = 1;
  std::vector<double> rebalance_;
  std::vector<double> drop_;
  std::vector<double> wait_rate_;
};

struct Scenario {
  RegionSet regions;
  TimeGrid grid;
  TravelTimeMatrix travel;
  DemandSet demand;
  CostModel costs;

  int region_count() const { return regions.size(); }
};

// Lists every broken invariant; an empty result means the scenario is usable.
inline std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> problems;
  const int n = s.regions.size();
  const int horizon = s.grid.horizon;

  if (!s.grid.valid()) {
    problems.push_back("time grid: need delta_t > 0, horizon >= 1 and tick dividing delta_t");
  }
  if (n < 1) problems.push_back("region set is empty");
  if (!s.regions.unique()) problems.push_back("region ids are not unique");

  if (s.travel.regions() != n) {
    problems.push_back("travel matrix covers " + std::to_string(s.travel.regions()) + " regions, expected " +
                       std::to_string(n));
  } else {
    if (s.travel.layers() != 1 && s.travel.layers() < horizon) {
      problems.push_back("time-varying travel matrix does not cover every step");
    }
    for (int layer = 1; layer <= s.travel.layers(); ++layer) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const int tau = s.travel(i, j, layer);
          if (i == j && tau != 1) {
            problems.push_back("idle arc tau(" + s.regions.id(i) + "," + s.regions.id(i) + ") at step " +
                               std::to_string(layer) + " is " + std::to_string(tau) + ", must be 1");
          } else if (i != j && tau < 1) {
            problems.push_back("tau(" + s.regions.id(i) + "," + s.regions.id(j) + ") at step " +
                               std::to_string(layer) + " is below one interval");
          }
        }
      }
    }
  }

  for (const auto& [key, count] : s.demand.entries()) {
    const bool origin_ok = key.origin >= 0 && key.origin < n;
    const bool dest_ok = key.destination >= 0 && key.destination < n;
    if (!origin_ok || !dest_ok) {
      problems.push_back("demand entry at step " + std::to_string(key.t) + " references unknown region");
      continue;
    }
    if (key.t < 1 || key.t > horizon) {
      problems.push_back("demand entry at step " + std::to_string(key.t) + " lies outside the horizon");
    }
    if (count < 0) problems.push_back("negative demand count at step " + std::to_string(key.t));
  }

  if (s.costs.regions() != n) {
    problems.push_back("cost model covers " + std::to_string(s.costs.regions()) + " regions, expected " +
                       std::to_string(n));
  } else {
    auto check = [&](const std::vector<double>& values, const char* what) {
      for (double v : values) {
        if (!std::isfinite(v) || v < 0.0) {
          problems.push_back(std::string(what) + " costs must be finite and nonnegative");
          return;
        }
      }
    };
    check(s.costs.raw_rebalance(), "rebalancing");
    check(s.costs.raw_drop(), "drop");
    check(s.costs.raw_wait_rate(), "wait");
  }
  return problems;
}

}  // namespace amod
