// Closed-form Lagrangian dynamics of the planar two-link arm with point
// masses at the link tips, angles measured from straight down. Written out
// by hand; shares no code with the recursive implementation.

#pragma once

#include <cmath>

#include <Eigen/Core>

namespace oracle {

struct TwoLinkParams {
  double m1 = 0.5, m2 = 0.5;
  double l1 = 1.0, l2 = 1.0;
  double g = 9.8;
  double izz = 0.0;  // rotational inertia of each link about its COM
};

inline Eigen::Matrix2d mass_matrix(const TwoLinkParams& p, const Eigen::Vector2d& q) {
  const double c2 = std::cos(q(1));
  Eigen::Matrix2d m;
  m(0, 0) = p.m1 * p.l1 * p.l1 + p.m2 * (p.l1 * p.l1 + p.l2 * p.l2 + 2.0 * p.l1 * p.l2 * c2) + 2.0 * p.izz;
  m(0, 1) = p.m2 * (p.l2 * p.l2 + p.l1 * p.l2 * c2) + p.izz;
  m(1, 0) = m(0, 1);
  m(1, 1) = p.m2 * p.l2 * p.l2 + p.izz;
  return m;
}

inline Eigen::Vector2d coriolis(const TwoLinkParams& p, const Eigen::Vector2d& q, const Eigen::Vector2d& qd) {
  const double h = p.m2 * p.l1 * p.l2 * std::sin(q(1));
  return {-h * (2.0 * qd(0) * qd(1) + qd(1) * qd(1)), h * qd(0) * qd(0)};
}

inline Eigen::Vector2d gravity(const TwoLinkParams& p, const Eigen::Vector2d& q) {
  const double s1 = std::sin(q(0));
  const double s12 = std::sin(q(0) + q(1));
  return {p.m1 * p.g * p.l1 * s1 + p.m2 * p.g * (p.l1 * s1 + p.l2 * s12), p.m2 * p.g * p.l2 * s12};
}

inline Eigen::Vector2d torque(const TwoLinkParams& p, const Eigen::Vector2d& q, const Eigen::Vector2d& qd,
                              const Eigen::Vector2d& qdd) {
  return mass_matrix(p, q) * qdd + coriolis(p, q, qd) + gravity(p, q);
}

}  // namespace oracle
