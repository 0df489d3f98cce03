#include "flatplan/trajectory.hpp"

#include <algorithm>
#include <string>

#include "flatplan/errors.hpp"

namespace flatplan {

void JointLimits::validate(int n) const {
  auto check = [n](const Eigen::VectorXd& lb, const Eigen::VectorXd& ub, const std::string& name) {
    if (lb.size() != n || ub.size() != n) {
      throw ConfigError("limits." + name + " bounds must have " + std::to_string(n) + " entries");
    }
    for (int i = 0; i < n; ++i) {
      if (!(lb(i) <= ub(i))) {
        throw ConfigError("limits." + name + ": lower bound exceeds upper bound at joint " + std::to_string(i + 1));
      }
    }
  };
  check(q_lb, q_ub, "q");
  check(qd_lb, qd_ub, "qd");
  check(tau_lb, tau_ub, "tau");
}

ScaledJointState eval_scaled(const TimeScaledTrajectory& traj, double s) {
  const auto b = eval_basis_all(traj.spec, s);
  return {traj.coeffs * b.col(0), traj.coeffs * b.col(1), traj.coeffs * b.col(2), traj.t_f};
}

JointState eval_state(const TimeScaledTrajectory& traj, double t) {
  if (!(traj.t_f > 0.0)) throw DomainError("eval_state: t_f must be positive");
  if (!(t >= 0.0 && t <= traj.t_f)) throw DomainError("eval_state: t outside [0, t_f]");
  const double s = std::min(1.0, t / traj.t_f);
  const ScaledJointState x = eval_scaled(traj, s);
  const double inv = 1.0 / traj.t_f;
  return {x.q, x.dq * inv, x.ddq * (inv * inv)};
}

LinearConstraintSet boundary_constraint_rows(const BasisSpec& spec, const BoundaryConditions& bc) {
  const int n = static_cast<int>(bc.q0.size());
  if (bc.qd0.size() != n || bc.qf.size() != n || bc.qdf.size() != n) {
    throw ConfigError("boundary vectors must all have the same length");
  }
  const DecisionLayout layout{n, spec.m};
  const Eigen::VectorXd b0 = eval_basis(spec, 0.0, 0), b1 = eval_basis(spec, 1.0, 0);
  const Eigen::VectorXd d0 = eval_basis(spec, 0.0, 1), d1 = eval_basis(spec, 1.0, 1);
  LinearConstraintSet out(layout.size());

  auto position_row = [&](int i, const Eigen::VectorXd& b, double value, const char* tag) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(layout.size());
    for (int j = 0; j < spec.m; ++j) row(layout.a(i, j)) = b(j);
    out.add(std::move(row), value, value, std::string(tag) + " joint " + std::to_string(i + 1));
  };
  auto velocity_row = [&](int i, const Eigen::VectorXd& d, double rate, const char* tag) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(layout.size());
    for (int j = 0; j < spec.m; ++j) row(layout.a(i, j)) = d(j);
    row(layout.tf()) = -rate;
    out.add(std::move(row), 0.0, 0.0, std::string(tag) + " joint " + std::to_string(i + 1));
  };
  for (int i = 0; i < n; ++i) {
    position_row(i, b0, bc.q0(i), "q(0)");
    position_row(i, b1, bc.qf(i), "q(1)");
    velocity_row(i, d0, bc.qd0(i), "qd(0)");
    velocity_row(i, d1, bc.qdf(i), "qd(1)");
  }
  return out;
}

}  // namespace flatplan
