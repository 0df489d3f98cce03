#include "flatplan/dynamics.hpp"

namespace flatplan {

namespace {

void check_sizes(const RobotModel& model, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                 const Eigen::VectorXd& c) {
  const auto n = static_cast<Eigen::Index>(model.dof());
  if (a.size() != n || b.size() != n || c.size() != n) {
    throw DomainError("joint state size does not match the model dof");
  }
}

}  // namespace

Eigen::VectorXd inverse_dynamics(const RobotModel& model, const JointState& state) {
  check_sizes(model, state.q, state.qd, state.qdd);
  return detail::rnea<double>(model, state.q, state.qd, state.qdd);
}

Eigen::VectorXd time_scaled_torque(const RobotModel& model, const ScaledJointState& state) {
  if (!(state.t_f > 0.0)) throw DomainError("time_scaled_torque: t_f must be positive");
  check_sizes(model, state.q, state.dq, state.ddq);
  return detail::scaled_rnea<double>(model, state.q, state.dq, state.ddq, state.t_f);
}

Eigen::VectorXd gravity_torque(const RobotModel& model, const Eigen::VectorXd& q) {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(model.dof());
  check_sizes(model, q, zero, zero);
  return detail::rnea<double>(model, q, zero, zero);
}

Eigen::MatrixXd inertia_matrix(const RobotModel& model, const Eigen::VectorXd& q) {
  const int n = model.dof();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  check_sizes(model, q, zero, zero);
  const Eigen::VectorXd g = detail::rnea<double>(model, q, zero, zero);
  Eigen::MatrixXd m(n, n);
  for (int j = 0; j < n; ++j) {
    m.col(j) = detail::rnea<double>(model, q, zero, Eigen::VectorXd::Unit(n, j)) - g;
  }
  return m;
}

}  // namespace flatplan
