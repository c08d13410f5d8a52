#pragma once

// Bounded primal revised simplex. Row logicals s = A x carry the row bounds,
// so every basis starts from the identity-like slack basis or a caller hint.
// Phase 1 minimizes the sum of bound violations of basic variables; phase 2
// the objective. Harris two-pass ratio test; Bland's rule takes over after a
// stall so degenerate problems cannot cycle.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "amod/core/errors.hpp"
#include "amod/opt/basis_factor.hpp"
#include "amod/opt/sparse_lp.hpp"
#include "amod/opt/types.hpp"

namespace amod::opt {

struct SimplexOptions {
  double time_limit_s = std::numeric_limits<double>::infinity();
  std::int64_t iteration_limit = -1;  // negative: size-based default
  int refactor_interval = 100;
  int stall_threshold = 200;          // degenerate iterations before Bland's rule
};

class RevisedSimplex {
 public:
  explicit RevisedSimplex(const SparseLinearProgram& lp) : lp_(lp) {
    if (auto problems = lp.validate(); !problems.empty()) {
      throw ModelError("solve_lp: " + problems.front());
    }
    n_ = lp.columns();
    m_ = lp.rows();
    total_ = n_ + m_;

    // Column-compressed structural matrix with duplicate entries merged.
    std::vector<std::vector<std::pair<int, double>>> cols(static_cast<std::size_t>(n_));
    for (const auto& e : lp.entries) {
      if (e.value != 0.0) cols[static_cast<std::size_t>(e.col)].emplace_back(e.row, e.value);
    }
    col_start_.assign(static_cast<std::size_t>(n_) + 1, 0);
    for (int j = 0; j < n_; ++j) {
      auto& c = cols[static_cast<std::size_t>(j)];
      std::sort(c.begin(), c.end());
      int write = 0;
      for (std::size_t k = 0; k < c.size(); ++k) {
        if (write > 0 && c[static_cast<std::size_t>(write - 1)].first == c[k].first) {
          c[static_cast<std::size_t>(write - 1)].second += c[k].second;
        } else {
          c[static_cast<std::size_t>(write++)] = c[k];
        }
      }
      c.resize(static_cast<std::size_t>(write));
      col_start_[static_cast<std::size_t>(j) + 1] = col_start_[static_cast<std::size_t>(j)] + write;
    }
    row_index_.reserve(static_cast<std::size_t>(col_start_.back()));
    values_.reserve(static_cast<std::size_t>(col_start_.back()));
    for (const auto& c : cols) {
      for (const auto& [r, v] : c) {
        row_index_.push_back(r);
        values_.push_back(v);
      }
    }

    cost_.assign(static_cast<std::size_t>(total_), 0.0);
    for (int j = 0; j < n_; ++j) cost_[static_cast<std::size_t>(j)] = lp.objective[static_cast<std::size_t>(j)];
    row_lower_.assign(static_cast<std::size_t>(m_), -kInf);
    row_upper_.assign(static_cast<std::size_t>(m_), kInf);
    for (int r = 0; r < m_; ++r) {
      const double b = lp.rhs[static_cast<std::size_t>(r)];
      switch (lp.sense[static_cast<std::size_t>(r)]) {
        case RowSense::kEqual: row_lower_[static_cast<std::size_t>(r)] = row_upper_[static_cast<std::size_t>(r)] = b; break;
        case RowSense::kLessEqual: row_upper_[static_cast<std::size_t>(r)] = b; break;
        case RowSense::kGreaterEqual: row_lower_[static_cast<std::size_t>(r)] = b; break;
      }
    }
  }

  int columns() const { return n_; }
  int rows() const { return m_; }

  SolveResult solve(const SimplexOptions& options = {}) {
    return solve(lp_.lower, lp_.upper, nullptr, options);
  }

  // Solves with the given structural bounds, optionally warm-started from a
  // basis (structurals then logicals, exactly `rows()` basic entries).
  SolveResult solve(const std::vector<double>& lower, const std::vector<double>& upper,
                    const std::vector<VarStatus>* basis_hint, const SimplexOptions& options) {
    started_ = std::chrono::steady_clock::now();
    options_ = options;
    lo_.assign(static_cast<std::size_t>(total_), 0.0);
    up_.assign(static_cast<std::size_t>(total_), 0.0);
    for (int j = 0; j < n_; ++j) {
      lo_[static_cast<std::size_t>(j)] = lower[static_cast<std::size_t>(j)];
      up_[static_cast<std::size_t>(j)] = upper[static_cast<std::size_t>(j)];
    }
    for (int r = 0; r < m_; ++r) {
      lo_[static_cast<std::size_t>(n_ + r)] = row_lower_[static_cast<std::size_t>(r)];
      up_[static_cast<std::size_t>(n_ + r)] = row_upper_[static_cast<std::size_t>(r)];
    }

    SolveResult result;
    for (int j = 0; j < n_; ++j) {
      if (lo_[static_cast<std::size_t>(j)] > up_[static_cast<std::size_t>(j)] + Tolerances::kFeasibility) {
        result.status = SolveStatus::kInfeasible;
        result.stats.wall_seconds = elapsed();
        return result;
      }
    }

    install_basis(basis_hint);
    const SolveStatus status = iterate(result.stats.iterations);
    result.status = status;
    result.stats.wall_seconds = elapsed();
    result.basis = status_;
    if (status == SolveStatus::kOptimal) {
      result.values.assign(x_.begin(), x_.begin() + n_);
      // Snap values that sit on a bound within tolerance.
      for (int j = 0; j < n_; ++j) {
        double& v = result.values[static_cast<std::size_t>(j)];
        if (std::abs(v - lo_[static_cast<std::size_t>(j)]) < 1e-12) v = lo_[static_cast<std::size_t>(j)];
        if (std::abs(v - up_[static_cast<std::size_t>(j)]) < 1e-12) v = up_[static_cast<std::size_t>(j)];
      }
      result.objective = lp_.evaluate(result.values);
      result.duals = duals_;
      result.stats.has_incumbent = true;
      result.stats.lower_bound = result.objective;
    }
    return result;
  }

 private:
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
  }

  // --- column access -----------------------------------------------------

  template <typename Fn>
  void for_column(int j, Fn&& fn) const {
    if (j < n_) {
      for (int k = col_start_[static_cast<std::size_t>(j)]; k < col_start_[static_cast<std::size_t>(j) + 1]; ++k) {
        fn(row_index_[static_cast<std::size_t>(k)], values_[static_cast<std::size_t>(k)]);
      }
    } else {
      fn(j - n_, -1.0);
    }
  }

  double dot_column(int j, const std::vector<double>& y) const {
    if (j >= n_) return -y[static_cast<std::size_t>(j - n_)];
    double sum = 0.0;
    for (int k = col_start_[static_cast<std::size_t>(j)]; k < col_start_[static_cast<std::size_t>(j) + 1]; ++k) {
      sum += values_[static_cast<std::size_t>(k)] * y[static_cast<std::size_t>(row_index_[static_cast<std::size_t>(k)])];
    }
    return sum;
  }

  // --- basis management ----------------------------------------------------

  void place_nonbasic(int j, VarStatus preferred) {
    const double lo = lo_[static_cast<std::size_t>(j)];
    const double up = up_[static_cast<std::size_t>(j)];
    VarStatus s = preferred;
    if (s == VarStatus::kBasic) s = VarStatus::kAtLower;
    if (s == VarStatus::kAtLower && lo == -kInf) s = up == kInf ? VarStatus::kFree : VarStatus::kAtUpper;
    if (s == VarStatus::kAtUpper && up == kInf) s = lo == -kInf ? VarStatus::kFree : VarStatus::kAtLower;
    if (s == VarStatus::kFree && lo != -kInf) s = VarStatus::kAtLower;
    if (s == VarStatus::kFree && up != kInf) s = VarStatus::kAtUpper;
    status_[static_cast<std::size_t>(j)] = s;
    switch (s) {
      case VarStatus::kAtLower: x_[static_cast<std::size_t>(j)] = lo; break;
      case VarStatus::kAtUpper: x_[static_cast<std::size_t>(j)] = up; break;
      default: x_[static_cast<std::size_t>(j)] = 0.0; break;
    }
  }

  void install_basis(const std::vector<VarStatus>* hint) {
    status_.assign(static_cast<std::size_t>(total_), VarStatus::kAtLower);
    x_.assign(static_cast<std::size_t>(total_), 0.0);
    head_.clear();

    bool usable = hint != nullptr && hint->size() == static_cast<std::size_t>(total_);
    if (usable) {
      const auto basics = std::count(hint->begin(), hint->end(), VarStatus::kBasic);
      usable = basics == m_;
    }
    if (usable) {
      for (int j = 0; j < total_; ++j) {
        const VarStatus s = (*hint)[static_cast<std::size_t>(j)];
        if (s == VarStatus::kBasic) {
          status_[static_cast<std::size_t>(j)] = VarStatus::kBasic;
          head_.push_back(j);
        } else {
          place_nonbasic(j, s);
        }
      }
    } else {
      for (int j = 0; j < n_; ++j) place_nonbasic(j, VarStatus::kAtLower);
      for (int r = 0; r < m_; ++r) {
        status_[static_cast<std::size_t>(n_ + r)] = VarStatus::kBasic;
        head_.push_back(n_ + r);
      }
    }
    refactor();
  }

  void refactor() {
    for (int attempt = 0; attempt < 4; ++attempt) {
      std::vector<SparseColumn> cols(static_cast<std::size_t>(m_));
      for (int p = 0; p < m_; ++p) {
        auto& c = cols[static_cast<std::size_t>(p)];
        for_column(head_[static_cast<std::size_t>(p)], [&](int r, double v) {
          c.index.push_back(r);
          c.value.push_back(v);
        });
      }
      const auto report = factor_.factorize(m_, cols);
      if (!report.singular) {
        recompute_basic_values();
        return;
      }
      // Swap dependent columns for logicals of the rows left without a pivot.
      for (std::size_t k = 0; k < report.unpivoted_positions.size(); ++k) {
        const int p = report.unpivoted_positions[k];
        const int r = report.unpivoted_rows[k];
        const int leaving = head_[static_cast<std::size_t>(p)];
        const int entering = n_ + r;
        const double v = x_[static_cast<std::size_t>(leaving)];
        const double lo = lo_[static_cast<std::size_t>(leaving)];
        const double up = up_[static_cast<std::size_t>(leaving)];
        VarStatus s = VarStatus::kAtLower;
        if (lo == -kInf && up == kInf) {
          s = VarStatus::kFree;
        } else if (lo == -kInf || (up != kInf && std::abs(v - up) < std::abs(v - lo))) {
          s = VarStatus::kAtUpper;
        }
        place_nonbasic(leaving, s);
        status_[static_cast<std::size_t>(entering)] = VarStatus::kBasic;
        head_[static_cast<std::size_t>(p)] = entering;
      }
    }
    throw ModelError("simplex: unable to obtain a nonsingular basis");
  }

  void recompute_basic_values() {
    std::vector<double> rhs(static_cast<std::size_t>(m_), 0.0);
    for (int j = 0; j < total_; ++j) {
      if (status_[static_cast<std::size_t>(j)] == VarStatus::kBasic) continue;
      const double v = x_[static_cast<std::size_t>(j)];
      if (v == 0.0) continue;
      for_column(j, [&](int r, double a) { rhs[static_cast<std::size_t>(r)] -= a * v; });
    }
    factor_.ftran(rhs);
    for (int p = 0; p < m_; ++p) x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(p)])] = rhs[static_cast<std::size_t>(p)];
  }

  // --- main loop ----------------------------------------------------------

  double infeasibility(int j) const {
    const double v = x_[static_cast<std::size_t>(j)];
    const double lo = lo_[static_cast<std::size_t>(j)];
    const double up = up_[static_cast<std::size_t>(j)];
    if (v < lo - Tolerances::kFeasibility) return lo - v;
    if (v > up + Tolerances::kFeasibility) return v - up;
    return 0.0;
  }

  double total_infeasibility() const {
    double sum = 0.0;
    for (int j : head_) sum += infeasibility(j);
    return sum;
  }

  double phase2_objective() const {
    double sum = 0.0;
    for (int j = 0; j < n_; ++j) sum += cost_[static_cast<std::size_t>(j)] * x_[static_cast<std::size_t>(j)];
    return sum;
  }

  // Direction (+1 increase, -1 decrease) in which nonbasic j improves, or 0.
  int eligible(int j, double d) const {
    const VarStatus s = status_[static_cast<std::size_t>(j)];
    if (s == VarStatus::kBasic) return 0;
    if (lo_[static_cast<std::size_t>(j)] == up_[static_cast<std::size_t>(j)]) return 0;
    const double tol = Tolerances::kOptimality;
    if (s == VarStatus::kAtLower) return d < -tol ? 1 : 0;
    if (s == VarStatus::kAtUpper) return d > tol ? -1 : 0;
    if (d < -tol) return 1;
    if (d > tol) return -1;
    return 0;
  }

  // Returns the entering variable or -1.
  int price(bool phase1, bool bland, int& direction) {
    direction = 0;
    auto reduced = [&](int j) { return (phase1 ? 0.0 : cost_[static_cast<std::size_t>(j)]) - dot_column(j, y_); };
    if (bland) {
      for (int j = 0; j < total_; ++j) {
        if (status_[static_cast<std::size_t>(j)] == VarStatus::kBasic) continue;
        const int dir = eligible(j, reduced(j));
        if (dir != 0) {
          direction = dir;
          return j;
        }
      }
      return -1;
    }
    // Partial Dantzig pricing over segments of the variable list.
    const int segment = total_ <= 4000 ? total_ : std::max(2000, total_ / 16);
    int best = -1;
    double best_score = 0.0;
    int scanned = 0;
    int j = price_start_ % std::max(total_, 1);
    while (scanned < total_) {
      const int end = std::min(scanned + segment, total_);
      for (; scanned < end; ++scanned) {
        if (status_[static_cast<std::size_t>(j)] != VarStatus::kBasic) {
          const double d = reduced(j);
          const int dir = eligible(j, d);
          if (dir != 0 && std::abs(d) > best_score) {
            best_score = std::abs(d);
            best = j;
            direction = dir;
          }
        }
        if (++j == total_) j = 0;
      }
      if (best >= 0) break;
    }
    price_start_ = j;
    return best;
  }

  SolveStatus iterate(std::int64_t& iterations) {
    const std::int64_t limit =
        options_.iteration_limit >= 0 ? options_.iteration_limit : 200LL * (m_ + n_) + 10000;
    y_.assign(static_cast<std::size_t>(m_), 0.0);
    std::vector<double> alpha(static_cast<std::size_t>(m_));
    std::vector<double> cb(static_cast<std::size_t>(m_));

    bool bland = false;
    int stall = 0;
    double last_progress = std::numeric_limits<double>::infinity();
    bool last_phase1 = true;
    int verify_rounds = 0;

    while (true) {
      if (iterations >= limit) return SolveStatus::kLimitReached;
      if ((iterations & 63) == 0 && elapsed() > options_.time_limit_s) return SolveStatus::kLimitReached;
      if (static_cast<int>(factor_.update_count()) >= options_.refactor_interval ||
          factor_.eta_nonzeros() > 4 * (factor_.factor_nonzeros() + static_cast<std::size_t>(m_))) {
        refactor();
      }

      const double infeas = total_infeasibility();
      const bool phase1 = infeas > 0.0;
      if (phase1 != last_phase1) {
        last_progress = std::numeric_limits<double>::infinity();
        stall = 0;
        bland = false;
        last_phase1 = phase1;
      }
      const double progress = phase1 ? infeas : phase2_objective();
      if (progress < last_progress - 1e-12 * (1.0 + std::abs(progress))) {
        last_progress = progress;
        stall = 0;
        bland = false;
      } else if (++stall > options_.stall_threshold) {
        bland = true;
      }

      for (int p = 0; p < m_; ++p) {
        const int j = head_[static_cast<std::size_t>(p)];
        if (phase1) {
          const double v = x_[static_cast<std::size_t>(j)];
          cb[static_cast<std::size_t>(p)] =
              v < lo_[static_cast<std::size_t>(j)] - Tolerances::kFeasibility ? -1.0
              : v > up_[static_cast<std::size_t>(j)] + Tolerances::kFeasibility ? 1.0
                                                                               : 0.0;
        } else {
          cb[static_cast<std::size_t>(p)] = cost_[static_cast<std::size_t>(j)];
        }
      }
      y_ = cb;
      factor_.btran(y_);

      int direction = 0;
      const int q = price(phase1, bland, direction);
      if (q < 0) {
        // Confirm on a fresh factorization before declaring the outcome.
        if (factor_.update_count() > 0 && verify_rounds < 3) {
          ++verify_rounds;
          refactor();
          continue;
        }
        if (phase1) return SolveStatus::kInfeasible;
        duals_ = y_;
        return SolveStatus::kOptimal;
      }
      verify_rounds = 0;
      ++iterations;

      std::fill(alpha.begin(), alpha.end(), 0.0);
      for_column(q, [&](int r, double v) { alpha[static_cast<std::size_t>(r)] = v; });
      factor_.ftran(alpha);

      int leave = -1;
      double theta = 0.0;
      bool flip = false;
      if (!ratio_test(q, direction, alpha, phase1, bland, leave, theta, flip)) {
        if (phase1) {
          // Numerical trouble: rebuild and retry with exact pricing.
          refactor();
          bland = true;
          continue;
        }
        return SolveStatus::kUnbounded;
      }

      const double step = direction * theta;
      x_[static_cast<std::size_t>(q)] += step;
      if (step != 0.0) {
        for (int p = 0; p < m_; ++p) {
          const double a = alpha[static_cast<std::size_t>(p)];
          if (a != 0.0) x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(p)])] -= a * step;
        }
      }
      if (flip) {
        status_[static_cast<std::size_t>(q)] =
            direction > 0 ? VarStatus::kAtUpper : VarStatus::kAtLower;
        x_[static_cast<std::size_t>(q)] =
            direction > 0 ? up_[static_cast<std::size_t>(q)] : lo_[static_cast<std::size_t>(q)];
        continue;
      }

      const int leaving = head_[static_cast<std::size_t>(leave)];
      // The leaving variable stops at the bound it was heading for.
      const double rate = -direction * alpha[static_cast<std::size_t>(leave)];
      const double v = x_[static_cast<std::size_t>(leaving)];
      const double lo = lo_[static_cast<std::size_t>(leaving)];
      const double up = up_[static_cast<std::size_t>(leaving)];
      if (lo == up) {
        status_[static_cast<std::size_t>(leaving)] = VarStatus::kAtLower;
        x_[static_cast<std::size_t>(leaving)] = lo;
      } else if (rate < 0.0) {
        // Decreasing: reaches its lower bound, or its upper bound when it
        // came from above.
        const bool from_above = up != kInf && v > up - Tolerances::kFeasibility && std::abs(v - up) < std::abs(v - lo);
        status_[static_cast<std::size_t>(leaving)] = from_above ? VarStatus::kAtUpper : VarStatus::kAtLower;
        x_[static_cast<std::size_t>(leaving)] = from_above ? up : lo;
      } else {
        const bool from_below = lo != -kInf && v < lo + Tolerances::kFeasibility && std::abs(v - lo) < std::abs(v - up);
        status_[static_cast<std::size_t>(leaving)] = from_below ? VarStatus::kAtLower : VarStatus::kAtUpper;
        x_[static_cast<std::size_t>(leaving)] = from_below ? lo : up;
      }
      status_[static_cast<std::size_t>(q)] = VarStatus::kBasic;
      head_[static_cast<std::size_t>(leave)] = q;
      factor_.update(leave, alpha);
    }
  }

  // Bound reached by basic variable at position p when it moves with `rate`
  // per unit step; returns false when it never blocks.
  bool blocking_distance(int p, double rate, bool phase1, double slack, double& distance) const {
    const int j = head_[static_cast<std::size_t>(p)];
    const double v = x_[static_cast<std::size_t>(j)];
    const double lo = lo_[static_cast<std::size_t>(j)];
    const double up = up_[static_cast<std::size_t>(j)];
    const double tol = Tolerances::kFeasibility;
    if (rate < 0.0) {
      if (phase1 && v > up + tol) {
        distance = (v - up + slack) / -rate;
        return true;
      }
      if (phase1 && v < lo - tol) return false;
      if (lo == -kInf) return false;
      distance = (v - lo + slack) / -rate;
      return true;
    }
    if (phase1 && v < lo - tol) {
      distance = (lo - v + slack) / rate;
      return true;
    }
    if (phase1 && v > up + tol) return false;
    if (up == kInf) return false;
    distance = (up - v + slack) / rate;
    return true;
  }

  bool ratio_test(int q, int direction, const std::vector<double>& alpha, bool phase1, bool bland, int& leave,
                  double& theta, bool& flip) const {
    const double flip_distance = up_[static_cast<std::size_t>(q)] - lo_[static_cast<std::size_t>(q)];
    leave = -1;
    flip = false;

    if (bland) {
      double best = std::numeric_limits<double>::infinity();
      int best_var = std::numeric_limits<int>::max();
      for (int p = 0; p < m_; ++p) {
        const double a = alpha[static_cast<std::size_t>(p)];
        if (std::abs(a) <= Tolerances::kPivot) continue;
        double d = 0.0;
        if (!blocking_distance(p, -direction * a, phase1, 0.0, d)) continue;
        d = std::max(d, 0.0);
        const int var = head_[static_cast<std::size_t>(p)];
        if (d < best - 1e-12 || (std::abs(d - best) <= 1e-12 && var < best_var)) {
          best = d;
          best_var = var;
          leave = p;
        }
      }
      if (flip_distance <= best) {
        if (flip_distance == kInf) return false;
        flip = true;
        leave = -1;
        theta = flip_distance;
        return true;
      }
      theta = best;
      return leave >= 0;
    }

    // Harris pass 1: largest step keeping every basic within relaxed bounds.
    double relaxed = std::numeric_limits<double>::infinity();
    for (int p = 0; p < m_; ++p) {
      const double a = alpha[static_cast<std::size_t>(p)];
      if (std::abs(a) <= Tolerances::kPivot) continue;
      double d = 0.0;
      if (blocking_distance(p, -direction * a, phase1, Tolerances::kFeasibility, d)) relaxed = std::min(relaxed, d);
    }
    if (flip_distance <= relaxed) {
      if (flip_distance == kInf) return false;
      flip = true;
      theta = flip_distance;
      return true;
    }
    if (relaxed == std::numeric_limits<double>::infinity()) return false;

    // Pass 2: among rows blocking within the relaxed step, the largest pivot.
    double best_pivot = 0.0;
    for (int p = 0; p < m_; ++p) {
      const double a = alpha[static_cast<std::size_t>(p)];
      if (std::abs(a) <= Tolerances::kPivot) continue;
      double d = 0.0;
      if (!blocking_distance(p, -direction * a, phase1, 0.0, d)) continue;
      if (d <= relaxed && std::abs(a) > best_pivot) {
        best_pivot = std::abs(a);
        leave = p;
        theta = std::max(d, 0.0);
      }
    }
    return leave >= 0;
  }

  const SparseLinearProgram& lp_;
  int n_ = 0, m_ = 0, total_ = 0;
  std::vector<int> col_start_, row_index_;
  std::vector<double> values_;
  std::vector<double> cost_, row_lower_, row_upper_;

  std::vector<double> lo_, up_, x_, y_, duals_;
  std::vector<VarStatus> status_;
  std::vector<int> head_;
  BasisFactor factor_;
  int price_start_ = 0;
  SimplexOptions options_;
  std::chrono::steady_clock::time_point started_;
};

inline SolveResult solve_lp(const SparseLinearProgram& lp, const SimplexOptions& options = {}) {
  RevisedSimplex simplex(lp);
  return simplex.solve(options);
}

}  // namespace amod::opt
