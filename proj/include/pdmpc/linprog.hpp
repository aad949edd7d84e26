#pragma once

// Small dense linear programs and an exact simplex solver for them.
// This is the inner solver of the control loop: one LP per candidate
// weight vector per receding-horizon step.

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "pdmpc/errors.hpp"

namespace pdmpc::linprog {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// minimize c.v subject to eq rows (row.v = rhs), ineq rows (row.v >= rhs)
/// and per-variable bounds. Lower bounds are finite; uppers may be +inf.
struct StandardFormLP {
  struct Row {
    std::vector<double> coef;
    double rhs = 0.0;
  };

  std::size_t n = 0;
  std::vector<double> objective;
  std::vector<Row> eq_rows;
  std::vector<Row> ineq_rows;
  std::vector<double> lower;
  std::vector<double> upper;

  /// Sizes the problem: n variables, default bounds [0, +inf).
  void resize(std::size_t vars);

  void add_eq(std::vector<double> coef, double rhs);
  void add_ineq(std::vector<double> coef, double rhs);

  /// Throws ValidationError on length mismatches, non-finite objective or
  /// lower bounds, or lower > upper.
  void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* status_name(SolveStatus s);

struct LPSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::vector<double> values;  // length n when Optimal
  double objective_value = 0.0;
  long iterations = 0;
};

struct SolveOptions {
  double feas_tol = 1e-7;  // constraint-residual acceptance, relative
  double opt_tol = 1e-8;   // reduced-cost threshold for entering variables
};

/// Two-phase primal simplex on the full tableau, with bounded variables
/// handled directly (bound flips, no extra rows). Deterministic: Dantzig
/// pricing with smallest-index tie-breaks, switching to Bland's rule after
/// a stall of 2n iterations. Returns NumericalFailure when the iteration
/// cap trips; callers fall back as for Infeasible but log it apart.
LPSolution solve(const StandardFormLP& lp, const SolveOptions& opts = {});

/// Independent residual check of a candidate point (used as the
/// feasibility certificate for every Optimal solution). Returns the worst
/// violation, scaled by max(1, |rhs|) rowwise / max(1, |bound|) per
/// variable; <= feas_tol means the point is acceptable.
double max_violation(const StandardFormLP& lp, const std::vector<double>& v);

/// Plain-text dump (objective, rows, bounds) for desk inspection.
std::string dump(const StandardFormLP& lp);

}  // namespace pdmpc::linprog
