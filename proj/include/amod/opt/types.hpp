#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace amod::opt {

// Centralized numerical tolerances for the whole engine.
struct Tolerances {
  static constexpr double kFeasibility = 1e-7;    // absolute, rows and bounds
  static constexpr double kOptimality = 1e-7;     // reduced-cost sign test
  static constexpr double kIntegrality = 1e-6;    // distance to nearest integer
  static constexpr double kRelativeGap = 1e-9;    // MILP termination
  static constexpr double kPivot = 1e-9;          // smallest usable pivot element
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kLimitReached };

inline std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kLimitReached: return "limit-reached";
  }
  return "unknown";
}

struct SolverStats {
  std::int64_t iterations = 0;
  std::int64_t nodes = 0;         // branch-and-bound nodes processed
  std::int64_t branches = 0;      // nodes split into children
  double wall_seconds = 0.0;
  bool has_incumbent = false;
  double lower_bound = 0.0;       // proven bound (minimization)
  double gap = 0.0;               // relative gap at termination
  // Incumbent objective and global lower bound after each processed node.
  std::vector<double> incumbent_trace;
  std::vector<double> bound_trace;
};

// Simplex basis status of a structural or row-logical variable.
enum class VarStatus : std::uint8_t { kBasic, kAtLower, kAtUpper, kFree };

struct SolveResult {
  SolveStatus status = SolveStatus::kInfeasible;
  double objective = 0.0;
  std::vector<double> values;       // structural variables
  std::vector<double> duals;        // one per row (LP only, when optimal)
  std::vector<VarStatus> basis;     // structurals followed by row logicals
  SolverStats stats;

  bool has_solution() const {
    return status == SolveStatus::kOptimal || (status == SolveStatus::kLimitReached && stats.has_incumbent);
  }
};

}  // namespace amod::opt
