#include "flatplan/nlp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "flatplan/lp.hpp"

namespace flatplan {

namespace {

std::string violation_message(double v) {
  std::ostringstream os;
  os << "solve_nlp: initial point is infeasible (max violation " << v << ")";
  return os.str();
}

double row_scale(double bound) { return std::max(1.0, std::abs(bound)); }

struct Direction {
  bool ok = false;
  Eigen::VectorXd d;
  double z = 0.0;
};

// min z  s.t.  grad.d <= z,  linear rows exact on x + d,
// nonlinear rows (normalized) g + J d <= theta z,  |d| <= radius.
Direction direction_lp(const NlpProblem& pb, const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                       const Eigen::VectorXd& g, const Eigen::MatrixXd& jac, double radius,
                       const NlpOptions& opt) {
  const int nv = pb.num_vars;
  LinearProgram lp(nv + 1);
  lp.objective(nv) = 1.0;
  for (int k = 0; k < nv; ++k) {
    lp.var_lower(k) = std::max(-radius, pb.var_lower(k) - x(k));
    lp.var_upper(k) = std::min(radius, pb.var_upper(k) - x(k));
    if (lp.var_lower(k) > lp.var_upper(k)) lp.var_lower(k) = lp.var_upper(k) = 0.0;
  }

  Eigen::VectorXd row(nv + 1);
  row.head(nv) = grad;
  row(nv) = -1.0;
  lp.constraints.add(row, -kInf, 0.0, "objective");

  for (const LinearRow& r : pb.linear.rows) {
    const double ax = r.coeffs.dot(x);
    // Inequalities out of reach of the box cannot bind.
    if (!r.is_equality() && std::min(ax - r.lower, r.upper - ax) > r.coeffs.cwiseAbs().sum() * radius) continue;
    row.head(nv) = r.coeffs;
    row(nv) = 0.0;
    lp.constraints.add(row, r.lower - ax, r.upper - ax, r.label);
  }

  // A nonlinear row can only bind if its slack is within reach of the box.
  const double z_reach = opt.theta * grad.cwiseAbs().sum() * radius;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const auto add_side = [&](double bound, double sign) {
      const double sigma = row_scale(bound);
      const double slack = sign * (bound - g(i)) / sigma;
      const Eigen::VectorXd gi = sign * jac.row(i).transpose() / sigma;
      if (slack > gi.cwiseAbs().sum() * radius + z_reach) return;
      row.head(nv) = gi;
      row(nv) = -opt.theta;
      lp.constraints.add(row, -kInf, slack);
    };
    if (std::isfinite(pb.nonlinear_upper(i))) add_side(pb.nonlinear_upper(i), 1.0);
    if (std::isfinite(pb.nonlinear_lower(i))) add_side(pb.nonlinear_lower(i), -1.0);
  }

  const LpSolution sol = solve_lp(lp);
  Direction out;
  if (sol.status != LpStatus::optimal) return out;
  out.ok = true;
  out.d = sol.x.head(nv);
  out.z = sol.x(nv);
  return out;
}

}  // namespace

const char* to_string(NlpStatus status) {
  switch (status) {
    case NlpStatus::improved:
      return "improved";
    case NlpStatus::no_improvement:
      return "no_improvement";
    case NlpStatus::iteration_cap:
      return "iteration_cap";
  }
  return "unknown";
}

InfeasibleStart::InfeasibleStart(double v) : std::invalid_argument(violation_message(v)), violation(v) {}

double max_violation(const NlpProblem& problem, const Eigen::VectorXd& x) {
  double worst = problem.linear.max_violation(x);
  // Empty bound vectors mean unbounded.
  for (int k = 0; k < problem.var_lower.size(); ++k) worst = std::max(worst, problem.var_lower(k) - x(k));
  for (int k = 0; k < problem.var_upper.size(); ++k) worst = std::max(worst, x(k) - problem.var_upper(k));
  if (problem.nonlinear) {
    const Eigen::VectorXd g = problem.nonlinear(x);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g(i))) return kInf;
      worst = std::max({worst, problem.nonlinear_lower(i) - g(i), g(i) - problem.nonlinear_upper(i)});
    }
  }
  return std::max(worst, 0.0);
}

NlpResult solve_nlp(const NlpProblem& pb, const Eigen::VectorXd& x0, const NlpOptions& opt) {
  NlpProblem problem = pb;
  const int nv = problem.num_vars;
  if (x0.size() != nv) throw std::invalid_argument("solve_nlp: x0 has the wrong length");
  if (problem.var_lower.size() == 0) problem.var_lower = Eigen::VectorXd::Constant(nv, -kInf);
  if (problem.var_upper.size() == 0) problem.var_upper = Eigen::VectorXd::Constant(nv, kInf);
  if (!problem.nonlinear) {
    problem.nonlinear = [](const Eigen::VectorXd&) { return Eigen::VectorXd(); };
    problem.nonlinear_jacobian = [nv](const Eigen::VectorXd&) { return Eigen::MatrixXd(0, nv); };
    problem.nonlinear_lower = problem.nonlinear_upper = Eigen::VectorXd();
  }

  const double v0 = max_violation(problem, x0);
  if (!(v0 <= opt.feasibility_tol)) throw InfeasibleStart(v0);

  NlpResult res;
  Eigen::VectorXd x = x0;
  double fx = problem.objective(x);
  const double f0 = fx;
  res.log.push_back({0, fx, v0, 0.0});
  double radius = opt.initial_radius;
  res.stop_reason = "iteration cap";

  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    const Eigen::VectorXd grad = problem.objective_gradient(x);
    const Eigen::VectorXd g = problem.nonlinear(x);
    const Eigen::MatrixXd jac = problem.nonlinear_jacobian(x);
    const Direction dir = direction_lp(problem, x, grad, g, jac, radius, opt);
    if (!dir.ok) {
      radius *= 0.25;
      if (radius < opt.step_tol) {
        res.stop_reason = "direction subproblem failed";
        break;
      }
      continue;
    }
    if (dir.z >= -opt.stationarity_tol) {
      res.stop_reason = "stationary";
      break;
    }
    const double slope = grad.dot(dir.d);
    double alpha = 1.0;
    bool accepted = false, refined = false;
    Eigen::VectorXd trial;
    double f_trial = 0.0, v_trial = 0.0;
    for (int bt = 0; bt < opt.max_backtracks; ++bt, alpha *= 0.5) {
      trial = x + alpha * dir.d;
      f_trial = problem.objective(trial);
      if (!(f_trial <= fx + opt.armijo * alpha * std::min(slope, 0.0)) || !(f_trial < fx)) continue;
      v_trial = max_violation(problem, trial);
      if (v_trial <= opt.feasibility_tol) {
        if (problem.refine && !problem.refine(trial, problem)) {
          refined = true;
          break;
        }
        accepted = true;
        break;
      }
    }
    if (refined) {
      // New constraints: recompute the direction from the same point.
      ++res.refinements;
      continue;
    }
    const double step = alpha * dir.d.lpNorm<Eigen::Infinity>();
    if (!accepted) {
      radius *= 0.25;
      if (radius < opt.step_tol) {
        res.stop_reason = "no acceptable step";
        break;
      }
      continue;
    }
    x = trial;
    fx = f_trial;
    res.log.push_back({it + 1, fx, v_trial, step});
    radius = alpha == 1.0 ? std::min(2.0 * radius, 1e3) : std::max(step, opt.step_tol);
    if (step < opt.step_tol) {
      res.stop_reason = "step below tolerance";
      ++it;
      break;
    }
  }
  res.iterations = it;
  res.x_best = x;
  res.objective = fx;
  if (res.stop_reason == "iteration cap") {
    res.status = NlpStatus::iteration_cap;
  } else {
    res.status = fx < f0 ? NlpStatus::improved : NlpStatus::no_improvement;
  }
  return res;
}

}  // namespace flatplan
