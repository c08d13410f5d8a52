#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace amod::opt {

struct SparseColumn {
  std::vector<int> index;
  std::vector<double> value;
};

// Sparse LU factorization of a simplex basis with Markowitz pivoting and
// threshold partial pivoting, plus product-form updates between
// refactorizations.
//
// Index spaces: right-hand sides of ftran are indexed by row, results by
// basis position; btran goes the other way.
class BasisFactor {
 public:
  struct Report {
    bool singular = false;
    std::vector<int> unpivoted_positions;  // dependent basis columns
    std::vector<int> unpivoted_rows;       // rows left without a pivot
  };

  Report factorize(int m, const std::vector<SparseColumn>& columns) {
    m_ = m;
    lower_.clear();
    upper_.clear();
    etas_.clear();
    eta_nonzeros_ = 0;
    pivot_row_.clear();
    pivot_pos_.clear();
    lower_.reserve(static_cast<std::size_t>(m));
    upper_.reserve(static_cast<std::size_t>(m));

    // Active submatrix, column-wise values plus row-wise patterns.
    col_rows_.assign(static_cast<std::size_t>(m), {});
    col_vals_.assign(static_cast<std::size_t>(m), {});
    row_cols_.assign(static_cast<std::size_t>(m), {});
    col_count_.assign(static_cast<std::size_t>(m), 0);
    row_count_.assign(static_cast<std::size_t>(m), 0);
    row_active_.assign(static_cast<std::size_t>(m), 1);
    col_active_.assign(static_cast<std::size_t>(m), 1);

    for (int c = 0; c < m; ++c) {
      const auto& col = columns[static_cast<std::size_t>(c)];
      for (std::size_t k = 0; k < col.index.size(); ++k) {
        if (col.value[k] == 0.0) continue;
        const int r = col.index[k];
        // Merge duplicates.
        auto& rows = col_rows_[static_cast<std::size_t>(c)];
        auto it = std::find(rows.begin(), rows.end(), r);
        if (it != rows.end()) {
          col_vals_[static_cast<std::size_t>(c)][static_cast<std::size_t>(it - rows.begin())] += col.value[k];
          continue;
        }
        rows.push_back(r);
        col_vals_[static_cast<std::size_t>(c)].push_back(col.value[k]);
        row_cols_[static_cast<std::size_t>(r)].push_back(c);
        ++col_count_[static_cast<std::size_t>(c)];
        ++row_count_[static_cast<std::size_t>(r)];
      }
    }

    std::vector<int> col_singletons, row_singletons;
    for (int c = 0; c < m; ++c) {
      if (col_count_[static_cast<std::size_t>(c)] == 1) col_singletons.push_back(c);
    }
    for (int r = 0; r < m; ++r) {
      if (row_count_[static_cast<std::size_t>(r)] == 1) row_singletons.push_back(r);
    }

    Report report;
    int pivots = 0;
    while (pivots < m) {
      int prow = -1, pcol = -1;

      while (!col_singletons.empty() && prow < 0) {
        const int c = col_singletons.back();
        col_singletons.pop_back();
        if (!col_active_[static_cast<std::size_t>(c)] || col_count_[static_cast<std::size_t>(c)] != 1) continue;
        const auto [r, v] = only_active_entry(c);
        if (r >= 0 && std::abs(v) > kAbsolutePivot) {
          prow = r;
          pcol = c;
        }
      }
      while (prow < 0 && !row_singletons.empty()) {
        const int r = row_singletons.back();
        row_singletons.pop_back();
        if (!row_active_[static_cast<std::size_t>(r)] || row_count_[static_cast<std::size_t>(r)] != 1) continue;
        const int c = only_active_column(r);
        if (c < 0) continue;
        const double v = value_at(c, r);
        double col_max = 0.0;
        for_each_active(c, [&](int, double a) { col_max = std::max(col_max, std::abs(a)); });
        if (std::abs(v) > kAbsolutePivot && std::abs(v) >= kRelativePivot * col_max) {
          prow = r;
          pcol = c;
        }
      }
      if (prow < 0) {
        if (!markowitz_pivot(prow, pcol)) break;
      }

      eliminate(prow, pcol, col_singletons, row_singletons);
      ++pivots;
    }

    if (pivots < m) {
      report.singular = true;
      for (int c = 0; c < m; ++c) {
        if (col_active_[static_cast<std::size_t>(c)]) report.unpivoted_positions.push_back(c);
      }
      for (int r = 0; r < m; ++r) {
        if (row_active_[static_cast<std::size_t>(r)]) report.unpivoted_rows.push_back(r);
      }
    }

    col_rows_.clear();
    col_vals_.clear();
    row_cols_.clear();
    return report;
  }

  // Solves B x = b. `b` is row-indexed on entry and position-indexed on exit.
  void ftran(std::vector<double>& b) const {
    for (const auto& l : lower_) {
      const double pivot_value = b[static_cast<std::size_t>(l.pivot_row)];
      if (pivot_value == 0.0) continue;
      for (std::size_t k = 0; k < l.rows.size(); ++k) {
        b[static_cast<std::size_t>(l.rows[k])] -= l.vals[k] * pivot_value;
      }
    }
    work_.assign(static_cast<std::size_t>(m_), 0.0);
    for (std::size_t k = upper_.size(); k-- > 0;) {
      const auto& u = upper_[k];
      double value = b[static_cast<std::size_t>(u.pivot_row)];
      for (std::size_t e = 0; e < u.cols.size(); ++e) {
        value -= u.vals[e] * work_[static_cast<std::size_t>(u.cols[e])];
      }
      work_[static_cast<std::size_t>(u.pivot_pos)] = value / u.diag;
    }
    b.swap(work_);
    for (const auto& eta : etas_) {
      double& xp = b[static_cast<std::size_t>(eta.pos)];
      if (xp == 0.0) continue;
      xp /= eta.pivot;
      const double scaled = xp;
      for (std::size_t k = 0; k < eta.index.size(); ++k) {
        b[static_cast<std::size_t>(eta.index[k])] -= eta.value[k] * scaled;
      }
    }
  }

  // Solves B^T y = c. `c` is position-indexed on entry and row-indexed on exit.
  void btran(std::vector<double>& c) const {
    for (std::size_t k = etas_.size(); k-- > 0;) {
      const auto& eta = etas_[k];
      double sum = c[static_cast<std::size_t>(eta.pos)];
      for (std::size_t e = 0; e < eta.index.size(); ++e) {
        sum -= eta.value[e] * c[static_cast<std::size_t>(eta.index[e])];
      }
      c[static_cast<std::size_t>(eta.pos)] = sum / eta.pivot;
    }
    work_.assign(static_cast<std::size_t>(m_), 0.0);
    for (const auto& u : upper_) {
      const double z = c[static_cast<std::size_t>(u.pivot_pos)] / u.diag;
      work_[static_cast<std::size_t>(u.pivot_row)] = z;
      if (z == 0.0) continue;
      for (std::size_t e = 0; e < u.cols.size(); ++e) {
        c[static_cast<std::size_t>(u.cols[e])] -= u.vals[e] * z;
      }
    }
    for (std::size_t k = lower_.size(); k-- > 0;) {
      const auto& l = lower_[k];
      double sum = 0.0;
      for (std::size_t e = 0; e < l.rows.size(); ++e) {
        sum += l.vals[e] * work_[static_cast<std::size_t>(l.rows[e])];
      }
      work_[static_cast<std::size_t>(l.pivot_row)] -= sum;
    }
    c.swap(work_);
  }

  // Records the replacement of the column at `pos` by a column whose ftran
  // image is `alpha` (position-indexed).
  void update(int pos, const std::vector<double>& alpha) {
    Eta eta;
    eta.pos = pos;
    eta.pivot = alpha[static_cast<std::size_t>(pos)];
    for (int i = 0; i < m_; ++i) {
      const double a = alpha[static_cast<std::size_t>(i)];
      if (i != pos && std::abs(a) > 1e-14) {
        eta.index.push_back(i);
        eta.value.push_back(a);
      }
    }
    eta_nonzeros_ += eta.index.size() + 1;
    etas_.push_back(std::move(eta));
  }

  std::size_t update_count() const { return etas_.size(); }
  std::size_t eta_nonzeros() const { return eta_nonzeros_; }
  std::size_t factor_nonzeros() const {
    std::size_t total = 0;
    for (const auto& l : lower_) total += l.rows.size();
    for (const auto& u : upper_) total += u.cols.size() + 1;
    return total;
  }

 private:
  static constexpr double kAbsolutePivot = 1e-11;
  static constexpr double kRelativePivot = 0.01;
  static constexpr double kDropTolerance = 1e-14;

  struct LowerEta {
    int pivot_row = 0;
    std::vector<int> rows;
    std::vector<double> vals;
  };
  struct UpperRow {
    int pivot_row = 0;
    int pivot_pos = 0;
    double diag = 1.0;
    std::vector<int> cols;
    std::vector<double> vals;
  };
  struct Eta {
    int pos = 0;
    double pivot = 1.0;
    std::vector<int> index;
    std::vector<double> value;
  };

  template <typename Fn>
  void for_each_active(int c, Fn&& fn) const {
    const auto& rows = col_rows_[static_cast<std::size_t>(c)];
    const auto& vals = col_vals_[static_cast<std::size_t>(c)];
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (row_active_[static_cast<std::size_t>(rows[k])]) fn(rows[k], vals[k]);
    }
  }

  std::pair<int, double> only_active_entry(int c) const {
    std::pair<int, double> found{-1, 0.0};
    for_each_active(c, [&](int r, double v) { found = {r, v}; });
    return found;
  }

  int only_active_column(int r) const {
    for (int c : row_cols_[static_cast<std::size_t>(r)]) {
      if (col_active_[static_cast<std::size_t>(c)] && has_entry(c, r)) return c;
    }
    return -1;
  }

  bool has_entry(int c, int r) const {
    const auto& rows = col_rows_[static_cast<std::size_t>(c)];
    return std::find(rows.begin(), rows.end(), r) != rows.end();
  }

  double value_at(int c, int r) const {
    const auto& rows = col_rows_[static_cast<std::size_t>(c)];
    auto it = std::find(rows.begin(), rows.end(), r);
    if (it == rows.end()) return 0.0;
    return col_vals_[static_cast<std::size_t>(c)][static_cast<std::size_t>(it - rows.begin())];
  }

  bool markowitz_pivot(int& prow, int& pcol) {
    // Examine the few sparsest active columns.
    std::vector<std::pair<int, int>> candidates;  // (count, column)
    for (int c = 0; c < m_; ++c) {
      if (col_active_[static_cast<std::size_t>(c)]) candidates.emplace_back(col_count_[static_cast<std::size_t>(c)], c);
    }
    if (candidates.empty()) return false;
    const std::size_t keep = std::min<std::size_t>(4, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end());

    long long best_score = -1;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      if (k >= keep && best_score >= 0) break;
      const int c = candidates[k].second;
      double col_max = 0.0;
      for_each_active(c, [&](int, double v) { col_max = std::max(col_max, std::abs(v)); });
      if (col_max <= kAbsolutePivot) continue;
      for_each_active(c, [&](int r, double v) {
        if (std::abs(v) < kRelativePivot * col_max || std::abs(v) <= kAbsolutePivot) return;
        const long long score = static_cast<long long>(row_count_[static_cast<std::size_t>(r)] - 1) *
                                static_cast<long long>(col_count_[static_cast<std::size_t>(c)] - 1);
        if (best_score < 0 || score < best_score) {
          best_score = score;
          prow = r;
          pcol = c;
        }
      });
    }
    return best_score >= 0;
  }

  void eliminate(int prow, int pcol, std::vector<int>& col_singletons, std::vector<int>& row_singletons) {
    const double diag = value_at(pcol, prow);

    UpperRow urow;
    urow.pivot_row = prow;
    urow.pivot_pos = pcol;
    urow.diag = diag;
    auto& prow_cols = row_cols_[static_cast<std::size_t>(prow)];
    std::sort(prow_cols.begin(), prow_cols.end());
    prow_cols.erase(std::unique(prow_cols.begin(), prow_cols.end()), prow_cols.end());
    for (int c : prow_cols) {
      if (c == pcol || !col_active_[static_cast<std::size_t>(c)]) continue;
      const double v = value_at(c, prow);
      if (v == 0.0 && !has_entry(c, prow)) continue;
      urow.cols.push_back(c);
      urow.vals.push_back(v);
    }

    LowerEta leta;
    leta.pivot_row = prow;
    for_each_active(pcol, [&](int r, double v) {
      if (r == prow) return;
      leta.rows.push_back(r);
      leta.vals.push_back(v / diag);
    });

    row_active_[static_cast<std::size_t>(prow)] = 0;
    col_active_[static_cast<std::size_t>(pcol)] = 0;
    for (int c : urow.cols) {
      if (--col_count_[static_cast<std::size_t>(c)] == 1) col_singletons.push_back(c);
    }
    for (int r : leta.rows) {
      if (--row_count_[static_cast<std::size_t>(r)] == 1) row_singletons.push_back(r);
    }

    // Schur complement update with fill-in.
    for (std::size_t e = 0; e < urow.cols.size(); ++e) {
      const int c = urow.cols[e];
      const double u = urow.vals[e];
      if (u == 0.0) continue;
      auto& rows = col_rows_[static_cast<std::size_t>(c)];
      auto& vals = col_vals_[static_cast<std::size_t>(c)];
      for (std::size_t k = 0; k < leta.rows.size(); ++k) {
        const int r = leta.rows[k];
        const double delta = -leta.vals[k] * u;
        auto it = std::find(rows.begin(), rows.end(), r);
        if (it != rows.end()) {
          const auto idx = static_cast<std::size_t>(it - rows.begin());
          vals[idx] += delta;
          if (std::abs(vals[idx]) < kDropTolerance) {
            rows.erase(it);
            vals.erase(vals.begin() + static_cast<std::ptrdiff_t>(idx));
            if (--col_count_[static_cast<std::size_t>(c)] == 1) col_singletons.push_back(c);
            if (--row_count_[static_cast<std::size_t>(r)] == 1) row_singletons.push_back(r);
          }
        } else {
          rows.push_back(r);
          vals.push_back(delta);
          row_cols_[static_cast<std::size_t>(r)].push_back(c);
          ++col_count_[static_cast<std::size_t>(c)];
          ++row_count_[static_cast<std::size_t>(r)];
        }
      }
    }

    pivot_row_.push_back(prow);
    pivot_pos_.push_back(pcol);
    if (!leta.rows.empty()) lower_.push_back(std::move(leta));
    upper_.push_back(std::move(urow));
  }

  int m_ = 0;
  std::vector<LowerEta> lower_;
  std::vector<UpperRow> upper_;
  std::vector<Eta> etas_;
  std::size_t eta_nonzeros_ = 0;
  std::vector<int> pivot_row_, pivot_pos_;

  std::vector<std::vector<int>> col_rows_;
  std::vector<std::vector<double>> col_vals_;
  std::vector<std::vector<int>> row_cols_;
  std::vector<int> col_count_, row_count_;
  std::vector<char> row_active_, col_active_;

  mutable std::vector<double> work_;
};

}  // namespace amod::opt
