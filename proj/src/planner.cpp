#include "flatplan/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "flatplan/errors.hpp"
#include "flatplan/kernels.hpp"

namespace flatplan {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Worst excess of the grid torques over [lb, ub]; <= 0 when feasible.
double torque_excess(const Eigen::MatrixXd& tau, const Eigen::VectorXd& lb, const Eigen::VectorXd& ub) {
  double worst = -kInf;
  for (Eigen::Index p = 0; p < tau.cols(); ++p) {
    for (Eigen::Index i = 0; i < tau.rows(); ++i) {
      worst = std::max({worst, lb(i) - tau(i, p), tau(i, p) - ub(i)});
    }
  }
  return worst;
}

void note(FamilyViolation& fam, double v, double s, int joint, double tol) {
  if (v > tol) ++fam.count;
  if (v > fam.max_violation) {
    fam.max_violation = v;
    fam.s_at = s;
    fam.joint = joint + 1;
  }
}

std::string margins_text(const Eigen::VectorXd& margin) {
  std::ostringstream os;
  for (Eigen::Index i = 0; i < margin.size(); ++i) os << (i ? ", " : "") << "joint " << i + 1 << ": " << margin(i);
  return os.str();
}

}  // namespace

void PlanningProblem::validate() const {
  const int n = model.dof();
  if (n < 1) throw ConfigError("robot has no links");
  spec.validate();
  limits.validate(n);
  if (bc.q0.size() != n || bc.qd0.size() != n || bc.qf.size() != n || bc.qdf.size() != n) {
    throw ConfigError("boundary vectors must have " + std::to_string(n) + " entries");
  }
  for (int i = 0; i < n; ++i) {
    const std::string j = " at joint " + std::to_string(i + 1);
    if (bc.q0(i) < limits.q_lb(i) || bc.q0(i) > limits.q_ub(i)) throw ConfigError("q0 outside position bounds" + j);
    if (bc.qf(i) < limits.q_lb(i) || bc.qf(i) > limits.q_ub(i)) throw ConfigError("qf outside position bounds" + j);
    if (limits.qd_lb(i) > 0.0 || limits.qd_ub(i) < 0.0) throw ConfigError("velocity bounds must contain 0" + j);
  }
  if (spec.family == BasisFamily::bspline && spec.k < 3) {
    throw ConfigError("planning needs B-spline order k >= 3 for a continuous acceleration");
  }
  if (solver.samples < 2) throw ConfigError("solver.N must be at least 2");
  if (solver.dense_samples < 2) throw ConfigError("dense sample count must be at least 2");
  if (!(solver.torque_margin >= 0.0 && solver.torque_margin < 0.5)) {
    throw ConfigError("solver.torque_margin must be in [0, 0.5)");
  }
  if (!(solver.t_min > 0.0)) throw ConfigError("solver.t_min must be positive");
  if (!(solver.line_search_factor > 1.0)) throw ConfigError("solver.line_search_factor must exceed 1");
  if (solver.mode == ConstraintMode::hull && spec.family != BasisFamily::bspline) {
    throw ConfigError("hull constraints need a B-spline basis");
  }
  if (cost.type == CostType::time) {
    if (!bc.rest_to_rest()) throw ConfigError("free-time planning requires qd0 = qdf = 0");
  } else if (!(cost.t_f >= solver.t_min)) {
    throw ConfigError("cost.t_f must be at least solver.t_min");
  }
}

Eigen::VectorXd PlanningProblem::tau_lb_tight() const {
  return limits.tau_lb + solver.torque_margin * limits.tau_lb.cwiseAbs();
}

Eigen::VectorXd PlanningProblem::tau_ub_tight() const {
  return limits.tau_ub - solver.torque_margin * limits.tau_ub.cwiseAbs();
}

PremiseCheck check_gravity_premise(const Eigen::MatrixXd& a, const BasisSpec& spec, const RobotModel& model,
                                   const Eigen::VectorXd& tau_lb, const Eigen::VectorXd& tau_ub, int points) {
  const int n = model.dof();
  PremiseCheck out;
  out.margin = Eigen::VectorXd::Constant(n, kInf);
  const Eigen::VectorXd s = uniform_grid(points);
  std::vector<Eigen::VectorXd> g(points);
#pragma omp parallel for schedule(static)
  for (int p = 0; p < points; ++p) g[p] = gravity_torque(model, a * eval_basis(spec, s(p), 0));
  for (int p = 0; p < points; ++p) {
    for (int i = 0; i < n; ++i) out.margin(i) = std::min({out.margin(i), g[p](i) - tau_lb(i), tau_ub(i) - g[p](i)});
  }
  out.holds = (out.margin.array() > 0.0).all();
  return out;
}

LineSearchResult line_search_tf(const Eigen::MatrixXd& a, const BasisSpec& spec, const RobotModel& model,
                                const Eigen::VectorXd& tau_lb, const Eigen::VectorXd& tau_ub, double t_f0,
                                const Eigen::VectorXd& grid, const SolverSettings& settings) {
  if (!(t_f0 > 0.0)) throw DomainError("line_search_tf: t_f0 must be positive");
  const DecisionLayout layout{model.dof(), spec.m};
  const GridBasis basis = tabulate(spec, grid);
  LineSearchResult out;
  auto trial = [&](double t_f) {
    const Eigen::MatrixXd tau = torque_grid_parallel(model, basis, layout, layout.pack(a, t_f));
    const double excess = torque_excess(tau, tau_lb, tau_ub);
    out.trace.push_back({t_f, std::max(0.0, excess), excess <= 0.0});
    return excess <= 0.0;
  };

  if (trial(t_f0)) {
    out.t_f = t_f0;
    return out;
  }
  const double cap = settings.tf_cap_factor * t_f0;
  double lo = t_f0, hi = t_f0;
  while (true) {
    hi = lo * settings.line_search_factor;
    if (hi > cap) {
      std::ostringstream os;
      os << "line search passed the t_f cap " << cap << " without meeting the torque bounds";
      throw PlanError(os.str());
    }
    if (trial(hi)) break;
    lo = hi;
  }
  for (int k = 0; k < settings.bisection_steps; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (trial(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.t_f = hi;
  return out;
}

bool ConstraintReport::state_feasible() const {
  return position.max_violation <= tol && velocity.max_violation <= tol && boundary_residual <= tol;
}

bool ConstraintReport::torque_feasible() const { return torque.max_violation <= tol; }

ConstraintReport constraint_report(const TimeScaledTrajectory& traj, const PlanningProblem& problem,
                                   int dense_samples, double tol) {
  const int n = traj.dof();
  const auto& lim = problem.limits;
  ConstraintReport rep;
  rep.dense_samples = dense_samples;
  rep.tol = tol;
  const Eigen::VectorXd s = uniform_grid(dense_samples);
  const GridBasis basis = tabulate(traj.spec, s);
  const DecisionLayout layout{n, traj.spec.m};
  const Eigen::MatrixXd tau = torque_grid_parallel(problem.model, basis, layout, layout.pack(traj.coeffs, traj.t_f));
  for (int p = 0; p < dense_samples; ++p) {
    const Eigen::VectorXd q = traj.coeffs * basis.values[p].col(0);
    const Eigen::VectorXd qd = traj.coeffs * basis.values[p].col(1) / traj.t_f;
    for (int i = 0; i < n; ++i) {
      note(rep.position, std::max(lim.q_lb(i) - q(i), q(i) - lim.q_ub(i)), s(p), i, tol);
      note(rep.velocity, std::max(lim.qd_lb(i) - qd(i), qd(i) - lim.qd_ub(i)), s(p), i, tol);
      note(rep.torque, std::max(lim.tau_lb(i) - tau(i, p), tau(i, p) - lim.tau_ub(i)), s(p), i, tol);
    }
  }
  const auto& bc = problem.bc;
  const auto& b0 = basis.values.front();
  const auto& b1 = basis.values.back();
  rep.boundary_residual = std::max({(traj.coeffs * b0.col(0) - bc.q0).lpNorm<Eigen::Infinity>(),
                                    (traj.coeffs * b1.col(0) - bc.qf).lpNorm<Eigen::Infinity>(),
                                    (traj.coeffs * b0.col(1) / traj.t_f - bc.qd0).lpNorm<Eigen::Infinity>(),
                                    (traj.coeffs * b1.col(1) / traj.t_f - bc.qdf).lpNorm<Eigen::Infinity>()});
  return rep;
}

const char* to_string(PlanStatus status) {
  switch (status) {
    case PlanStatus::ok:
      return "ok";
    case PlanStatus::state_infeasible:
      return "state_infeasible";
    case PlanStatus::premise_violated:
      return "premise_violated";
    case PlanStatus::solver_failure:
      return "solver_failure";
  }
  return "unknown";
}

std::vector<double> exchange_points(const TimeScaledTrajectory& traj, const PlanningProblem& problem,
                                    const GridBasis& scan, bool state, bool torque, double threshold) {
  const int n = traj.dof();
  const int count = scan.size();
  const auto& lim = problem.limits;
  const Eigen::VectorXd tau_lb = problem.tau_lb_tight(), tau_ub = problem.tau_ub_tight();
  const DecisionLayout layout{n, traj.spec.m};
  // violation[family][i * count + p]: 0 position, 1 velocity, 2 torque.
  std::vector<std::vector<double>> v(3, std::vector<double>(static_cast<std::size_t>(n) * count, -kInf));
  if (state) {
    for (int p = 0; p < count; ++p) {
      const Eigen::VectorXd q = traj.coeffs * scan.values[p].col(0);
      const Eigen::VectorXd qd = traj.coeffs * scan.values[p].col(1) / traj.t_f;
      for (int i = 0; i < n; ++i) {
        v[0][i * count + p] = std::max(lim.q_lb(i) - q(i), q(i) - lim.q_ub(i));
        v[1][i * count + p] = std::max(lim.qd_lb(i) - qd(i), qd(i) - lim.qd_ub(i));
      }
    }
  }
  if (torque) {
    const Eigen::MatrixXd tau = torque_grid_parallel(problem.model, scan, layout, layout.pack(traj.coeffs, traj.t_f));
    for (int p = 0; p < count; ++p) {
      for (int i = 0; i < n; ++i) v[2][i * count + p] = std::max(tau_lb(i) - tau(i, p), tau(i, p) - tau_ub(i));
    }
  }
  std::vector<double> out;
  for (const auto& fam : v) {
    for (int i = 0; i < n; ++i) {
      const double* row = fam.data() + static_cast<std::size_t>(i) * count;
      for (int p = 0; p < count; ++p) {
        if (row[p] <= threshold) continue;
        if ((p > 0 && row[p - 1] > row[p]) || (p + 1 < count && row[p + 1] >= row[p])) continue;
        out.push_back(scan.s(p));
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

// Sample points shared by the LP state rows and the NLP torque rows.
struct SharedGrid {
  const BasisSpec* spec = nullptr;
  std::vector<double> points;
  GridBasis basis;

  Eigen::VectorXd vector() const { return Eigen::Map<const Eigen::VectorXd>(points.data(), points.size()); }

  /// Adds points not already present; returns the ones added, in order.
  std::vector<double> add(const std::vector<double>& pts) {
    std::vector<double> added;
    for (double s : pts) {
      const bool known = std::any_of(points.begin(), points.end(), [s](double t) { return std::abs(t - s) < 1e-12; });
      if (!known) added.push_back(s);
    }
    points.insert(points.end(), added.begin(), added.end());
    for (double s : added) {
      basis.s.conservativeResize(basis.s.size() + 1);
      basis.s(basis.s.size() - 1) = s;
      basis.values.push_back(eval_basis_all(*spec, s));
    }
    return added;
  }
};

}  // namespace

PlanResult plan(const PlanningProblem& problem) {
  problem.validate();
  const auto start = Clock::now();
  const int n = problem.model.dof();
  const SolverSettings& cfg = problem.solver;
  const DecisionLayout layout{n, problem.spec.m};
  const Eigen::VectorXd tau_lb = problem.tau_lb_tight();
  const Eigen::VectorXd tau_ub = problem.tau_ub_tight();
  const bool fixed_time = problem.cost.type == CostType::fixed_time_effort;
  const bool sampled = cfg.mode == ConstraintMode::sampled;
  // Below the NLP feasibility tolerance, so points added for a rejected
  // trial never make the current iterate infeasible.
  const double threshold = 0.1 * cfg.nlp.feasibility_tol;
  // The scan grid contains every point of the verification grid.
  const GridBasis scan = tabulate(problem.spec, uniform_grid(cfg.scan_factor * (cfg.dense_samples - 1) + 1));

  SharedGrid grid;
  grid.spec = &problem.spec;
  {
    const Eigen::VectorXd uniform = problem.grid();
    grid.add(std::vector<double>(uniform.begin(), uniform.end()));
  }

  PlanResult res;
  auto finish = [&](PlanStatus status, std::string message) {
    res.status = status;
    res.message = std::move(message);
    res.grid = grid.vector();
    res.seconds = seconds_since(start);
    return res;
  };
  auto make_stage = [&](const Eigen::MatrixXd& a, double t_f, double secs) {
    PlanStage st;
    st.present = true;
    st.traj = {a, problem.spec, t_f};
    st.report = constraint_report(st.traj, problem, cfg.dense_samples, cfg.report_tol);
    st.seconds = secs;
    return st;
  };

  // Step 1: state-constrained time-optimal LP. In sampled mode, points where
  // the state bounds break between samples join the grid and the LP is re-solved.
  auto t0 = Clock::now();
  LpBuildOptions lp_opts;
  lp_opts.mode = cfg.mode;
  lp_opts.t_min = cfg.t_min;
  if (fixed_time) lp_opts.fixed_tf = problem.cost.t_f;
  LinearProgram lp(0);
  int lp_points = 0;
  for (int round = 0;; ++round) {
    lp = build_time_optimal_lp(problem.spec, problem.bc, problem.limits, grid.vector(), lp_opts);
    res.lp_solution = solve_lp(lp, cfg.lp);
    if (res.lp_solution.status == LpStatus::infeasible) {
      std::ostringstream os;
      os << "state-infeasible problem: phase-one optimum " << res.lp_solution.phase_one_objective << " > 0";
      return finish(PlanStatus::state_infeasible, os.str());
    }
    if (res.lp_solution.status != LpStatus::optimal) {
      return finish(PlanStatus::solver_failure, std::string("LP solver: ") + to_string(res.lp_solution.status));
    }
    if (!sampled) break;
    const TimeScaledTrajectory t_lp{layout.coefficients(res.lp_solution.x), problem.spec,
                                    res.lp_solution.x(layout.tf())};
    const std::vector<double> pts = exchange_points(t_lp, problem, scan, true, false, threshold);
    if (pts.empty()) break;
    if (round >= cfg.exchange_rounds || lp_points >= cfg.max_exchange_points) {
      std::ostringstream os;
      os << "state grid refinement did not converge after " << round << " rounds (" << lp_points
         << " added points); consider the hull constraint mode";
      return finish(PlanStatus::solver_failure, os.str());
    }
    lp_points += static_cast<int>(grid.add(pts).size());
    ++res.exchange_rounds;
  }
  const Eigen::MatrixXd a_lp = layout.coefficients(res.lp_solution.x);
  const double tf_lp = res.lp_solution.x(layout.tf());
  res.lp = make_stage(a_lp, tf_lp, seconds_since(t0));

  // Gravity premise on a dense grid, against the tightened torque bounds.
  res.premise = check_gravity_premise(a_lp, problem.spec, problem.model, tau_lb, tau_ub,
                                      cfg.premise_density * cfg.samples);
  if (!res.premise.holds) {
    return finish(PlanStatus::premise_violated, "gravity premise violated; margins " + margins_text(res.premise.margin));
  }

  // Step 2: dilate t_f with A fixed until the grid torques fit.
  t0 = Clock::now();
  int ls_points = 0;
  for (int round = 0;; ++round) {
    if (fixed_time) {
      res.line_search = {};
      res.line_search.t_f = tf_lp;
      const double excess =
          torque_excess(torque_grid_parallel(problem.model, grid.basis, layout, res.lp_solution.x), tau_lb, tau_ub);
      res.line_search.trace.push_back({tf_lp, std::max(0.0, excess), excess <= 0.0});
      if (excess > 0.0) {
        std::ostringstream os;
        os << "fixed t_f " << tf_lp << " is not torque-feasible for the LP initial point (excess " << excess << ")";
        return finish(PlanStatus::premise_violated, os.str());
      }
    } else {
      try {
        res.line_search =
            line_search_tf(a_lp, problem.spec, problem.model, tau_lb, tau_ub, tf_lp, grid.vector(), cfg);
      } catch (const PlanError& e) {
        return finish(PlanStatus::solver_failure, e.what());
      }
    }
    const TimeScaledTrajectory t_feas{a_lp, problem.spec, res.line_search.t_f};
    const std::vector<double> pts = exchange_points(t_feas, problem, scan, false, true, threshold);
    if (pts.empty()) break;
    if (round >= cfg.exchange_rounds || ls_points >= cfg.max_exchange_points) {
      std::ostringstream os;
      os << "torque grid refinement did not converge after " << round << " rounds";
      return finish(PlanStatus::solver_failure, os.str());
    }
    ls_points += static_cast<int>(grid.add(pts).size());
    ++res.exchange_rounds;
  }
  res.feas = make_stage(a_lp, res.line_search.t_f, seconds_since(t0));

  // Step 3: feasible improvement. Trial points must also pass the scan grid;
  // failing points join the shared grid as new rows.
  t0 = Clock::now();
  const RobotModel& model = problem.model;
  NlpProblem nlp;
  nlp.num_vars = layout.size();
  nlp.linear = lp.constraints;
  if (sampled) {
    // Rows for points added during Step 2.
    nlp.linear = build_time_optimal_lp(problem.spec, problem.bc, problem.limits, grid.vector(), lp_opts).constraints;
  }
  nlp.var_lower = lp.var_lower;
  nlp.var_upper = lp.var_upper;
  nlp.nonlinear = [&](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(torque_grid_parallel(model, grid.basis, layout, x).reshaped());
  };
  nlp.nonlinear_jacobian = [&](const Eigen::VectorXd& x) {
    return torque_jacobian_parallel(model, grid.basis, layout, x);
  };
  nlp.nonlinear_lower = tau_lb.replicate(grid.basis.size(), 1);
  nlp.nonlinear_upper = tau_ub.replicate(grid.basis.size(), 1);
  if (fixed_time) {
    nlp.objective = [&](const Eigen::VectorXd& x) {
      return torque_grid_parallel(model, grid.basis, layout, x).squaredNorm() / grid.basis.size();
    };
    nlp.objective_gradient = [&](const Eigen::VectorXd& x) {
      const Eigen::MatrixXd tau = torque_grid_parallel(model, grid.basis, layout, x);
      const Eigen::MatrixXd jac = torque_jacobian_parallel(model, grid.basis, layout, x);
      return Eigen::VectorXd(2.0 / grid.basis.size() * jac.transpose() * Eigen::VectorXd(tau.reshaped()));
    };
  } else {
    nlp.objective = [tf = layout.tf()](const Eigen::VectorXd& x) { return x(tf); };
    nlp.objective_gradient = [size = layout.size(), tf = layout.tf()](const Eigen::VectorXd&) {
      return Eigen::VectorXd(Eigen::VectorXd::Unit(size, tf));
    };
  }
  int added_in_nlp = 0;
  nlp.refine = [&](const Eigen::VectorXd& x, NlpProblem& self) {
    const TimeScaledTrajectory t{layout.coefficients(x), problem.spec, x(layout.tf())};
    const std::vector<double> pts = exchange_points(t, problem, scan, sampled, true, threshold);
    if (pts.empty()) return true;
    if (added_in_nlp >= cfg.max_exchange_points) return false;
    const std::vector<double> added = grid.add(pts);
    added_in_nlp += static_cast<int>(added.size());
    if (sampled && !added.empty()) {
      const Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(added.data(), added.size());
      self.linear.append(sampled_state_rows(problem.spec, problem.limits, s));
    }
    self.nonlinear_lower = tau_lb.replicate(grid.basis.size(), 1);
    self.nonlinear_upper = tau_ub.replicate(grid.basis.size(), 1);
    return false;
  };

  const Eigen::VectorXd x_feas = layout.pack(a_lp, res.line_search.t_f);
  try {
    res.nlp = solve_nlp(nlp, x_feas, cfg.nlp);
    const Eigen::VectorXd& x = res.nlp.x_best;
    res.opt = make_stage(layout.coefficients(x), x(layout.tf()), seconds_since(t0));
  } catch (const std::exception& e) {
    // The feasible point stands in for the optimum.
    res.nlp_fallback = true;
    res.nlp.stop_reason = e.what();
    res.nlp.x_best = x_feas;
    res.opt = res.feas;
    res.opt.seconds = seconds_since(t0);
  }
  return finish(PlanStatus::ok, res.nlp_fallback ? "NLP failed; returning the feasible stage" : "ok");
}

}  // namespace flatplan
