// Basis families for q(s) = A b(s) on s in [0, 1]: raw monomials and
// clamped B-splines, plus the B-spline convex-hull constraint builders.

#pragma once

#include <Eigen/Core>

#include "flatplan/constraints.hpp"

namespace flatplan {

enum class BasisFamily { polynomial, bspline };

struct BasisSpec {
  BasisFamily family = BasisFamily::polynomial;
  int m = 0;               // number of basis functions
  int k = 0;               // B-spline order (degree k - 1)
  Eigen::VectorXd knots;   // length m + k, B-spline only

  static BasisSpec polynomial(int m);
  /// Clamped B-spline; uniform interior knots when `knots` is empty.
  static BasisSpec bspline(int k, int m, Eigen::VectorXd knots = {});

  /// Throws ConfigError describing the first broken invariant.
  void validate() const;
};

/// b(s), b'(s) or b''(s) for deriv = 0, 1, 2. Throws DomainError if s is
/// outside [0, 1].
Eigen::VectorXd eval_basis(const BasisSpec& spec, double s, int deriv);

/// All three derivative orders at once, as columns of an m x 3 matrix.
Eigen::Matrix<double, Eigen::Dynamic, 3> eval_basis_all(const BasisSpec& spec, double s);

/// Clamped knot vector of length m + k: k zeros, m - k uniform interior
/// knots, k ones.
Eigen::VectorXd clamped_knots(int k, int m);

/// q_lb <= a_ij <= q_ub for every coefficient; sufficient for the position
/// bound on all of [0, 1]. Throws ConfigError for the polynomial family.
LinearConstraintSet hull_bounds_position(const BasisSpec& spec, const Eigen::VectorXd& q_lb,
                                         const Eigen::VectorXd& q_ub);

/// Derivative control points d_ij = (k-1)(a_i,j+1 - a_ij) / (v_j+k - v_j+1)
/// kept inside [t_f qd_lb_i, t_f qd_ub_i]; two one-sided rows per point,
/// none for zero-length knot gaps. Sufficient for A b'(s) in t_f [qd_lb, qd_ub].
LinearConstraintSet hull_bounds_velocity(const BasisSpec& spec, const Eigen::VectorXd& qd_lb,
                                         const Eigen::VectorXd& qd_ub);

/// Uniform grid of `count` points on [0, 1], endpoints included.
Eigen::VectorXd uniform_grid(int count);

}  // namespace flatplan
