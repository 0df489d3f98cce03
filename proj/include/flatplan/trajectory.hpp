// Time-scaled joint trajectories q(t) = A b(t / t_f).

#pragma once

#include <Eigen/Core>

#include "flatplan/basis.hpp"
#include "flatplan/constraints.hpp"
#include "flatplan/dynamics.hpp"

namespace flatplan {

struct TimeScaledTrajectory {
  Eigen::MatrixXd coeffs;  // n x m
  BasisSpec spec;
  double t_f = 1.0;

  int dof() const { return static_cast<int>(coeffs.rows()); }
};

struct BoundaryConditions {
  Eigen::VectorXd q0, qd0, qf, qdf;

  bool rest_to_rest() const { return qd0.isZero(0.0) && qdf.isZero(0.0); }
};

struct JointLimits {
  Eigen::VectorXd q_lb, q_ub;
  Eigen::VectorXd qd_lb, qd_ub;
  Eigen::VectorXd tau_lb, tau_ub;

  /// Throws ConfigError on size mismatch or a lower bound above its upper bound.
  void validate(int n) const;
};

/// Physical state at time t in [0, t_f]; s = t / t_f with ds/dt = 1 / t_f.
JointState eval_state(const TimeScaledTrajectory& traj, double t);

/// (q, q', q'') in normalized time at s in [0, 1].
ScaledJointState eval_scaled(const TimeScaledTrajectory& traj, double s);

/// A b(0) = q0, A b(1) = qf, A b'(0) = qd0 t_f, A b'(1) = qdf t_f as 4n
/// equality rows over (A, t_f).
LinearConstraintSet boundary_constraint_rows(const BasisSpec& spec, const BoundaryConditions& bc);

}  // namespace flatplan
