// Time-optimal state-constrained LP and a dense two-phase simplex solver.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "flatplan/basis.hpp"
#include "flatplan/constraints.hpp"
#include "flatplan/trajectory.hpp"

namespace flatplan {

/// minimize objective . x subject to rows and var_lower <= x <= var_upper.
struct LinearProgram {
  Eigen::VectorXd objective;
  LinearConstraintSet constraints;
  Eigen::VectorXd var_lower;
  Eigen::VectorXd var_upper;

  explicit LinearProgram(int num_vars = 0);

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_equalities() const;
  /// Two-sided rows count twice, one-sided rows once.
  int num_one_sided_inequalities() const;

  /// Adds rows. With fold_unit_rows, rows of the form lo <= x_j <= hi
  /// tighten the variable bounds instead.
  void add_constraints(const LinearConstraintSet& set, bool fold_unit_rows = false);

  /// Largest bound or row violation of x.
  double max_violation(const Eigen::VectorXd& x) const;
};

enum class ConstraintMode { sampled, hull };

struct LpBuildOptions {
  ConstraintMode mode = ConstraintMode::sampled;
  double t_min = 1e-2;
  std::optional<double> fixed_tf;  // pins t_f instead of minimizing it
};

/// Position and velocity rows at each grid point: q_lb <= A b(s) <= q_ub,
/// A b'(s) - t_f qd_ub <= 0 and A b'(s) - t_f qd_lb >= 0.
LinearConstraintSet sampled_state_rows(const BasisSpec& spec, const JointLimits& limits, const Eigen::VectorXd& grid);

/// Builds min t_f subject to the boundary rows, the state constraints
/// (sampled at `grid` or via the B-spline hulls) and t_f >= t_min.
LinearProgram build_time_optimal_lp(const BasisSpec& spec, const BoundaryConditions& bc, const JointLimits& limits,
                                    const Eigen::VectorXd& grid, const LpBuildOptions& options = {});

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::iteration_limit;
  Eigen::VectorXd x;
  double objective = 0.0;
  /// Optimal Phase-I value; positive when the LP is infeasible.
  double phase_one_objective = 0.0;
  int iterations = 0;
  /// Largest constraint violation of x, recomputed from the original LP.
  double max_violation = 0.0;
};

struct SimplexOptions {
  int max_iterations = 50000;
  double pivot_tol = 1e-9;
  double cost_tol = 1e-9;
  double feasibility_tol = 1e-8;
  /// Consecutive degenerate pivots before switching from the largest
  /// coefficient rule to Bland's rule.
  int degenerate_switch = 50;
};

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options = {});

/// Plain-text dump of the LP (objective, rows, bounds) for inspection.
void write_lp_text(std::ostream& os, const LinearProgram& lp);

}  // namespace flatplan
