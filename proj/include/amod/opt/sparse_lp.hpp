#pragma once

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "amod/core/errors.hpp"

namespace amod::opt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { kEqual, kLessEqual, kGreaterEqual };

// minimize objective . x + offset
// subject to  row_k . x (sense_k) rhs_k,  lower <= x <= upper.
// Coefficients are kept as (row, column, value) triplets; duplicates add up.
struct SparseLinearProgram {
  struct Entry {
    int row = 0;
    int col = 0;
    double value = 0.0;
  };

  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::string> names;  // optional, column names for dumps
  std::vector<RowSense> sense;
  std::vector<double> rhs;
  std::vector<Entry> entries;
  double objective_offset = 0.0;

  int add_variable(double cost, double lo = 0.0, double up = kInf, std::string name = {}) {
    objective.push_back(cost);
    lower.push_back(lo);
    upper.push_back(up);
    names.push_back(std::move(name));
    return static_cast<int>(objective.size()) - 1;
  }

  int add_row(RowSense s, double right_hand_side) {
    sense.push_back(s);
    rhs.push_back(right_hand_side);
    return static_cast<int>(rhs.size()) - 1;
  }

  void set(int row, int col, double value) { entries.push_back(Entry{row, col, value}); }

  int columns() const { return static_cast<int>(objective.size()); }
  int rows() const { return static_cast<int>(rhs.size()); }

  std::vector<std::string> validate() const {
    std::vector<std::string> problems;
    const auto n = objective.size();
    if (lower.size() != n || upper.size() != n) problems.push_back("bound vectors do not match column count");
    if (sense.size() != rhs.size()) problems.push_back("row senses do not match row count");
    for (std::size_t j = 0; j < std::min({n, lower.size(), upper.size()}); ++j) {
      if (!std::isfinite(objective[j])) problems.push_back("non-finite objective coefficient");
      if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] || lower[j] == kInf ||
          upper[j] == -kInf) {
        problems.push_back("column " + std::to_string(j) + " has inconsistent bounds");
      }
    }
    for (double b : rhs) {
      if (!std::isfinite(b)) problems.push_back("non-finite right-hand side");
    }
    for (const auto& e : entries) {
      if (e.row < 0 || e.row >= rows() || e.col < 0 || e.col >= columns()) {
        problems.push_back("coefficient outside the row/column range");
        break;
      }
      if (!std::isfinite(e.value)) {
        problems.push_back("non-finite constraint coefficient");
        break;
      }
    }
    return problems;
  }

  // Row activities A x.
  std::vector<double> activities(const std::vector<double>& x) const {
    std::vector<double> act(rhs.size(), 0.0);
    for (const auto& e : entries) act[static_cast<std::size_t>(e.row)] += e.value * x[static_cast<std::size_t>(e.col)];
    return act;
  }

  double evaluate(const std::vector<double>& x) const {
    double value = objective_offset;
    for (std::size_t j = 0; j < objective.size(); ++j) value += objective[j] * x[j];
    return value;
  }

  // Largest bound or row violation of x.
  double max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < objective.size(); ++j) {
      worst = std::max({worst, lower[j] - x[j], x[j] - upper[j]});
    }
    const auto act = activities(x);
    for (std::size_t r = 0; r < rhs.size(); ++r) {
      const double diff = act[r] - rhs[r];
      switch (sense[r]) {
        case RowSense::kEqual: worst = std::max(worst, std::abs(diff)); break;
        case RowSense::kLessEqual: worst = std::max(worst, diff); break;
        case RowSense::kGreaterEqual: worst = std::max(worst, -diff); break;
      }
    }
    return worst;
  }
};

struct MilpProblem {
  SparseLinearProgram lp;
  std::vector<int> integral;  // columns restricted to integer values

  std::vector<std::string> validate() const {
    auto problems = lp.validate();
    for (int j : integral) {
      if (j < 0 || j >= lp.columns()) {
        problems.push_back("integral index outside the variable set");
        break;
      }
    }
    return problems;
  }
};

// Writes the problem in the CPLEX LP text format for cross-checking with
// external solvers.
inline void write_lp_format(std::ostream& os, const SparseLinearProgram& lp,
                            const std::vector<int>& integral = {}) {
  auto name = [&](int j) {
    const auto& given = lp.names[static_cast<std::size_t>(j)];
    return given.empty() ? "x" + std::to_string(j) : given;
  };
  auto term = [&](double coef, const std::string& var, bool first) {
    std::ostringstream s;
    s << std::setprecision(17);
    if (coef < 0) {
      s << (first ? "- " : " - ") << -coef << ' ' << var;
    } else {
      s << (first ? "" : " + ") << coef << ' ' << var;
    }
    return s.str();
  };

  os << "\\ generated by amod\nMinimize\n obj:";
  bool first = true;
  for (int j = 0; j < lp.columns(); ++j) {
    const double c = lp.objective[static_cast<std::size_t>(j)];
    if (c == 0.0) continue;
    os << ' ' << term(c, name(j), first);
    first = false;
  }
  if (first) os << " 0 " << name(0);
  os << "\nSubject To\n";

  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(lp.rows()));
  for (const auto& e : lp.entries) rows[static_cast<std::size_t>(e.row)].emplace_back(e.col, e.value);
  for (int r = 0; r < lp.rows(); ++r) {
    os << " c" << r << ":";
    bool first_term = true;
    for (const auto& [col, value] : rows[static_cast<std::size_t>(r)]) {
      os << ' ' << term(value, name(col), first_term);
      first_term = false;
    }
    if (first_term) os << " 0 " << name(0);
    switch (lp.sense[static_cast<std::size_t>(r)]) {
      case RowSense::kEqual: os << " = "; break;
      case RowSense::kLessEqual: os << " <= "; break;
      case RowSense::kGreaterEqual: os << " >= "; break;
    }
    os << std::setprecision(17) << lp.rhs[static_cast<std::size_t>(r)] << '\n';
  }

  os << "Bounds\n";
  for (int j = 0; j < lp.columns(); ++j) {
    const double lo = lp.lower[static_cast<std::size_t>(j)];
    const double up = lp.upper[static_cast<std::size_t>(j)];
    os << ' ';
    if (lo == -kInf && up == kInf) {
      os << name(j) << " free\n";
      continue;
    }
    if (lo == -kInf) {
      os << "-inf";
    } else {
      os << std::setprecision(17) << lo;
    }
    os << " <= " << name(j) << " <= ";
    if (up == kInf) {
      os << "+inf\n";
    } else {
      os << std::setprecision(17) << up << '\n';
    }
  }
  if (!integral.empty()) {
    os << "General\n";
    for (int j : integral) os << ' ' << name(j) << '\n';
  }
  os << "End\n";
}

}  // namespace amod::opt
