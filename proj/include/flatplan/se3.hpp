// SE(3) / se(3) primitives used by the recursive dynamics.
//
// Twists are stored as 6-vectors xi = (omega, v), angular part first.
// Wrenches use the matching (moment, force) ordering so that the dual
// pairing is the plain dot product.

#pragma once

#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace flatplan::se3 {

template <typename S>
using Vec3 = Eigen::Matrix<S, 3, 1>;
template <typename S>
using Mat3 = Eigen::Matrix<S, 3, 3>;
template <typename S>
using Vec6 = Eigen::Matrix<S, 6, 1>;
template <typename S>
using Mat6 = Eigen::Matrix<S, 6, 6>;
template <typename S>
using Mat4 = Eigen::Matrix<S, 4, 4>;

using Twist = Vec6<double>;

template <typename S>
struct Transform {
  Mat3<S> rotation = Mat3<S>::Identity();
  Vec3<S> translation = Vec3<S>::Zero();

  static Transform identity() { return {}; }

  Transform operator*(const Transform& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }

  Transform inverse() const {
    Mat3<S> rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  template <typename T>
  Transform<T> cast() const {
    return {rotation.template cast<T>(), translation.template cast<T>()};
  }
};

using RigidTransform = Transform<double>;

template <typename S>
Mat3<S> hat3(const Vec3<S>& w) {
  Mat3<S> m;
  // clang-format off
  m << S(0), -w(2),  w(1),
       w(2),  S(0), -w(0),
      -w(1),  w(0),  S(0);
  // clang-format on
  return m;
}

/// 4x4 matrix form of a twist, [[hat3(omega), v], [0, 0]].
template <typename S>
Mat4<S> hat6(const Vec6<S>& xi) {
  Mat4<S> m = Mat4<S>::Zero();
  m.template topLeftCorner<3, 3>() = hat3<S>(xi.template head<3>());
  m.template topRightCorner<3, 1>() = xi.template tail<3>();
  return m;
}

/// Inverse of hat6 for matrices in se(3).
template <typename S>
Vec6<S> vee6(const Mat4<S>& m) {
  Vec6<S> xi;
  xi << m(2, 1), m(0, 2), m(1, 0), m(0, 3), m(1, 3), m(2, 3);
  return xi;
}

/// exp(hat6(xi) * theta) for a normalized joint twist.
///
/// Revolute (|omega| = 1) uses Rodrigues' formula; prismatic (omega = 0)
/// is a pure translation v * theta. The scalar type of theta may differ
/// from the twist so that joint angles can carry derivatives.
template <typename S>
Transform<S> exp_twist(const Twist& xi, const S& theta) {
  using std::cos;
  using std::sin;
  const Eigen::Vector3d w = xi.head<3>();
  const Eigen::Vector3d v = xi.tail<3>();
  Transform<S> g;
  if (w.squaredNorm() == 0.0) {
    g.translation = v.cast<S>() * theta;
    return g;
  }
  const Mat3<S> wh = hat3<double>(w).cast<S>();
  const Mat3<S> wh2 = wh * wh;
  const S st = sin(theta);
  const S vt = S(1) - cos(theta);
  g.rotation = Mat3<S>::Identity() + wh * st + wh2 * vt;
  g.translation = (Mat3<S>::Identity() * theta + wh * vt + wh2 * (theta - st)) * v.cast<S>();
  return g;
}

/// Ad_G = [[R, 0], [hat(p) R, R]].
template <typename S>
Mat6<S> adjoint(const Transform<S>& g) {
  Mat6<S> m = Mat6<S>::Zero();
  m.template topLeftCorner<3, 3>() = g.rotation;
  m.template bottomRightCorner<3, 3>() = g.rotation;
  m.template bottomLeftCorner<3, 3>() = hat3<S>(g.translation) * g.rotation;
  return m;
}

/// ad_xi = [[hat(omega), 0], [hat(v), hat(omega)]]; the Lie bracket as a matrix.
template <typename S>
Mat6<S> ad_small(const Vec6<S>& xi) {
  Mat6<S> m = Mat6<S>::Zero();
  const Mat3<S> wh = hat3<S>(xi.template head<3>());
  m.template topLeftCorner<3, 3>() = wh;
  m.template bottomRightCorner<3, 3>() = wh;
  m.template bottomLeftCorner<3, 3>() = hat3<S>(xi.template tail<3>());
  return m;
}

// The dual maps Ad*_G and ad*_xi act on wrenches as adjoint(G)^T and
// ad_small(xi)^T. The helpers below apply them without forming the 6x6
// matrices, which matters inside the dynamics recursion.

/// adjoint(g) * xi.
template <typename S>
Vec6<S> apply_adjoint(const Transform<S>& g, const Vec6<S>& xi) {
  Vec6<S> out;
  const Vec3<S> rw = g.rotation * xi.template head<3>();
  out.template head<3>() = rw;
  out.template tail<3>() = g.rotation * xi.template tail<3>() + g.translation.cross(rw);
  return out;
}

/// adjoint(g)^T * f.
template <typename S>
Vec6<S> apply_adjoint_dual(const Transform<S>& g, const Vec6<S>& f) {
  Vec6<S> out;
  const Vec3<S> m = f.template head<3>();
  const Vec3<S> force = f.template tail<3>();
  // [R^T, -R^T hat(p); 0, R^T] applied to (m, force)
  out.template head<3>() = g.rotation.transpose() * (m - g.translation.cross(force));
  out.template tail<3>() = g.rotation.transpose() * force;
  return out;
}

/// ad_small(a) * b.
template <typename S>
Vec6<S> apply_ad(const Vec6<S>& a, const Vec6<S>& b) {
  Vec6<S> out;
  const Vec3<S> wa = a.template head<3>();
  out.template head<3>() = wa.cross(b.template head<3>());
  out.template tail<3>() = wa.cross(b.template tail<3>()) + a.template tail<3>().cross(b.template head<3>());
  return out;
}

/// ad_small(a)^T * f.
template <typename S>
Vec6<S> apply_ad_dual(const Vec6<S>& a, const Vec6<S>& f) {
  Vec6<S> out;
  const Vec3<S> wa = a.template head<3>();
  const Vec3<S> va = a.template tail<3>();
  const Vec3<S> m = f.template head<3>();
  const Vec3<S> force = f.template tail<3>();
  // hat(x)^T = -hat(x)
  out.template head<3>() = -(wa.cross(m)) - va.cross(force);
  out.template tail<3>() = -(wa.cross(force));
  return out;
}

}  // namespace flatplan::se3
