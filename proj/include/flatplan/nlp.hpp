// Forward-mode gradients and a feasible-direction NLP solver.
//
// The solver keeps every accepted iterate feasible: each step direction comes
// from a small LP (linearized objective and nonlinear rows, exact linear
// rows, box trust region), and a trial point is accepted only if it satisfies
// all constraints and decreases the objective.

#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "flatplan/constraints.hpp"
#include "flatplan/dual.hpp"
#include "flatplan/dynamics.hpp"

namespace flatplan {

/// Exact gradient of f at x with x.size() forward passes.
template <typename F>
Eigen::VectorXd gradient(F&& f, const Eigen::VectorXd& x) {
  VecX<Dual> xd(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) xd(i) = Dual(x(i));
  Eigen::VectorXd g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    xd(k).d = 1.0;
    g(k) = static_cast<Dual>(f(xd)).d;
    xd(k).d = 0.0;
  }
  return g;
}

struct NlpProblem {
  int num_vars = 0;
  std::function<double(const Eigen::VectorXd&)> objective;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> objective_gradient;
  /// Rows kept exactly along every step (boundary, state).
  LinearConstraintSet linear;
  Eigen::VectorXd var_lower, var_upper;
  /// nonlinear_lower <= g(x) <= nonlinear_upper.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> nonlinear;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> nonlinear_jacobian;
  Eigen::VectorXd nonlinear_lower, nonlinear_upper;
  /// Optional extra acceptance test for a trial that passed every other
  /// check. It may append constraints to the problem, which the current
  /// iterate must already satisfy, and returns false to reject the trial.
  std::function<bool(const Eigen::VectorXd&, NlpProblem&)> refine;
};

struct NlpOptions {
  int max_iterations = 200;
  double feasibility_tol = 1e-8;
  double step_tol = 1e-8;
  /// Stationarity: stop when the direction LP optimum z >= -stationarity_tol.
  double stationarity_tol = 1e-9;
  double initial_radius = 0.1;
  double armijo = 1e-4;
  /// Weight tying the nonlinear rows to the descent estimate.
  double theta = 1.0;
  int max_backtracks = 30;
};

enum class NlpStatus { improved, no_improvement, iteration_cap };

const char* to_string(NlpStatus status);

struct NlpIterate {
  int iteration = 0;
  double objective = 0.0;
  double max_violation = 0.0;
  double step_norm = 0.0;
};

struct NlpResult {
  Eigen::VectorXd x_best;
  int refinements = 0;
  double objective = 0.0;
  NlpStatus status = NlpStatus::no_improvement;
  int iterations = 0;
  std::string stop_reason;
  std::vector<NlpIterate> log;
};

class InfeasibleStart : public std::invalid_argument {
 public:
  explicit InfeasibleStart(double violation);
  double violation;
};

/// Largest violation of x over bounds, linear rows and nonlinear rows.
double max_violation(const NlpProblem& problem, const Eigen::VectorXd& x);

/// Throws InfeasibleStart if x0 violates any constraint by more than
/// options.feasibility_tol.
NlpResult solve_nlp(const NlpProblem& problem, const Eigen::VectorXd& x0, const NlpOptions& options = {});

}  // namespace flatplan
