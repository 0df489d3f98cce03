// Three-stage planner: time-optimal LP under state constraints, final-time
// dilation until the torques fit, then feasible NLP improvement.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "flatplan/basis.hpp"
#include "flatplan/kernels.hpp"
#include "flatplan/lp.hpp"
#include "flatplan/model.hpp"
#include "flatplan/nlp.hpp"
#include "flatplan/trajectory.hpp"

namespace flatplan {

enum class CostType { time, fixed_time_effort };

struct CostSpec {
  CostType type = CostType::time;
  double t_f = 0.0;  // fixed_time_effort only
};

struct SolverSettings {
  int samples = 24;  // shared LP / NLP grid size N
  ConstraintMode mode = ConstraintMode::sampled;
  double torque_margin = 0.02;  // fraction of each torque bound's magnitude
  double t_min = 1e-2;
  double line_search_factor = 1.5;
  int bisection_steps = 20;
  double tf_cap_factor = 1e4;
  int premise_density = 10;  // premise grid = premise_density * samples points
  int dense_samples = 1000;  // verification grid
  double report_tol = 1e-6;
  /// Candidate points for grid refinement: scan_factor * (dense_samples - 1) + 1.
  int scan_factor = 4;
  int exchange_rounds = 50;       // LP and line-search re-solves
  int max_exchange_points = 400;  // points each refinement loop may add
  NlpOptions nlp;
  SimplexOptions lp;
};

struct PlanningProblem {
  RobotModel model;
  BasisSpec spec;
  BoundaryConditions bc;
  JointLimits limits;
  CostSpec cost;
  SolverSettings solver;

  /// Throws ConfigError on inconsistent sizes, unordered limits, boundary
  /// states outside the bounds, or free-time planning between moving states.
  void validate() const;
  Eigen::VectorXd grid() const { return uniform_grid(solver.samples); }
  /// Torque bounds shrunk by the margin on each side.
  Eigen::VectorXd tau_lb_tight() const;
  Eigen::VectorXd tau_ub_tight() const;
};

struct PremiseCheck {
  bool holds = false;
  /// Smallest distance of G(A b(s)) to either bound, per joint; negative
  /// where the gravity torque leaves the bounds.
  Eigen::VectorXd margin;
};

/// Gravity torque along q = A b(s) on `points` uniform samples must stay
/// strictly inside (tau_lb, tau_ub).
PremiseCheck check_gravity_premise(const Eigen::MatrixXd& a, const BasisSpec& spec, const RobotModel& model,
                                   const Eigen::VectorXd& tau_lb, const Eigen::VectorXd& tau_ub, int points);

struct LineSearchTrial {
  double t_f = 0.0;
  double max_violation = 0.0;  // worst torque excess over the bounds on the grid
  bool feasible = false;
};

struct LineSearchResult {
  double t_f = 0.0;
  std::vector<LineSearchTrial> trace;
};

class PlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Smallest trial t_f >= t_f0 (geometric expansion then bisection) whose
/// grid torques fit in [tau_lb, tau_ub]. Throws PlanError past the cap.
LineSearchResult line_search_tf(const Eigen::MatrixXd& a, const BasisSpec& spec, const RobotModel& model,
                                const Eigen::VectorXd& tau_lb, const Eigen::VectorXd& tau_ub, double t_f0,
                                const Eigen::VectorXd& grid, const SolverSettings& settings = {});

struct FamilyViolation {
  double max_violation = 0.0;
  double s_at = 0.0;
  int joint = 0;  // 1-based, 0 when nothing is violated
  int count = 0;  // samples x joints beyond tolerance
};

struct ConstraintReport {
  int dense_samples = 0;
  double tol = 0.0;
  FamilyViolation position, velocity, torque;
  double boundary_residual = 0.0;

  bool state_feasible() const;
  bool torque_feasible() const;
  bool feasible() const { return state_feasible() && torque_feasible(); }
};

/// Checks q, qd and tau at dense_samples uniform points against the true bounds.
ConstraintReport constraint_report(const TimeScaledTrajectory& traj, const PlanningProblem& problem,
                                   int dense_samples, double tol = 1e-6);

/// Scan points at local maxima of the violation above threshold, per joint:
/// state against the true bounds, torque against the tightened bounds.
std::vector<double> exchange_points(const TimeScaledTrajectory& traj, const PlanningProblem& problem,
                                    const GridBasis& scan, bool state, bool torque, double threshold);

enum class PlanStatus { ok, state_infeasible, premise_violated, solver_failure };

const char* to_string(PlanStatus status);

struct PlanStage {
  bool present = false;
  TimeScaledTrajectory traj;
  ConstraintReport report;
  double seconds = 0.0;
};

struct PlanResult {
  PlanStatus status = PlanStatus::solver_failure;
  std::string message;
  PlanStage lp, feas, opt;
  LpSolution lp_solution;
  PremiseCheck premise;
  LineSearchResult line_search;
  NlpResult nlp;
  /// Final shared sample grid: the uniform points, then added points.
  Eigen::VectorXd grid;
  int exchange_rounds = 0;  // LP and line-search re-solves
  /// The NLP failed and stage_opt repeats stage_feas.
  bool nlp_fallback = false;
  double seconds = 0.0;
};

PlanResult plan(const PlanningProblem& problem);

}  // namespace flatplan
