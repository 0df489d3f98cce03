// Recursive Newton-Euler inverse dynamics on the product-of-exponentials
// chain model, in physical units, plus the time-scaled torque used by the
// planner.
//
// The time-scaled variant evaluates the recursion with qd = q'/t_f and
// qdd = q''/t_f^2 and a base acceleration of -gravity. Inlining t_f into the
// base acceleration and the force line (the textbook "scaled" recursion)
// only agrees with the physical torque at t_f = 1, so it is not used here.

#pragma once

#include <vector>

#include <Eigen/Core>

#include "flatplan/errors.hpp"
#include "flatplan/model.hpp"
#include "flatplan/se3.hpp"

namespace flatplan {

template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

struct JointState {
  Eigen::VectorXd q;
  Eigen::VectorXd qd;
  Eigen::VectorXd qdd;
};

/// Joint state in normalized time s = t / t_f; primes are d/ds.
struct ScaledJointState {
  Eigen::VectorXd q;
  Eigen::VectorXd dq;
  Eigen::VectorXd ddq;
  double t_f = 1.0;
};

namespace detail {

template <typename S>
VecX<S> rnea(const RobotModel& model, const VecX<S>& q, const VecX<S>& qd, const VecX<S>& qdd) {
  const int n = model.dof();
  std::vector<se3::Transform<S>> to_parent_inv(n);
  std::vector<se3::Vec6<S>> vel(n), acc(n);

  se3::Vec6<S> v_prev = se3::Vec6<S>::Zero();
  se3::Vec6<S> a_prev = se3::Vec6<S>::Zero();
  a_prev.template tail<3>() = (-model.gravity).template cast<S>();

  for (int i = 0; i < n; ++i) {
    const LinkSpec& link = model.links[i];
    const se3::Vec6<S> xi = link.joint_twist.template cast<S>();
    const se3::Transform<S> f =
        link.home_offset.template cast<S>() * se3::exp_twist<S>(link.joint_twist, q(i));
    to_parent_inv[i] = f.inverse();
    vel[i] = se3::apply_adjoint(to_parent_inv[i], v_prev) + xi * qd(i);
    acc[i] = se3::apply_adjoint(to_parent_inv[i], a_prev) + se3::apply_ad(vel[i], xi) * qd(i) +
             xi * qdd(i);
    v_prev = vel[i];
    a_prev = acc[i];
  }

  VecX<S> tau(n);
  se3::Vec6<S> f_next = se3::Vec6<S>::Zero();
  for (int i = n - 1; i >= 0; --i) {
    const se3::Mat6<S> inertia = model.links[i].inertia.matrix.template cast<S>();
    se3::Vec6<S> f = inertia * acc[i] - se3::apply_ad_dual(vel[i], se3::Vec6<S>(inertia * vel[i]));
    if (i + 1 < n) f += se3::apply_adjoint_dual(to_parent_inv[i + 1], f_next);
    tau(i) = model.links[i].joint_twist.template cast<S>().dot(f);
    f_next = f;
  }
  return tau;
}

/// Torque at normalized-time state (q, q', q'') with final time t_f.
template <typename S>
VecX<S> scaled_rnea(const RobotModel& model, const VecX<S>& q, const VecX<S>& dq,
                    const VecX<S>& ddq, const S& t_f) {
  const S inv = S(1) / t_f;
  return rnea<S>(model, q, VecX<S>(dq * inv), VecX<S>(ddq * (inv * inv)));
}

}  // namespace detail

/// tau = M(q) qdd + C(q, qd) qd + G(q), computed in O(n).
Eigen::VectorXd inverse_dynamics(const RobotModel& model, const JointState& state);

/// [M(q) q'' + C(q, q') q'] / t_f^2 + G(q). Throws DomainError for t_f <= 0.
Eigen::VectorXd time_scaled_torque(const RobotModel& model, const ScaledJointState& state);

Eigen::VectorXd gravity_torque(const RobotModel& model, const Eigen::VectorXd& q);

/// Joint-space inertia, column j = ID(q, 0, e_j) - G(q).
Eigen::MatrixXd inertia_matrix(const RobotModel& model, const Eigen::VectorXd& q);

}  // namespace flatplan
