#include "flatplan/kernels.hpp"

#include "flatplan/dual.hpp"
#include "flatplan/dynamics.hpp"
#include "flatplan/errors.hpp"

namespace flatplan {

namespace {

void check_sizes(const RobotModel& model, const GridBasis& basis, const DecisionLayout& layout,
                 const Eigen::VectorXd& x) {
  if (layout.n != model.dof()) throw DomainError("decision layout does not match the model");
  if (x.size() != layout.size()) throw DomainError("decision vector has the wrong length");
  for (const auto& b : basis.values) {
    if (b.rows() != layout.m) throw DomainError("tabulated basis does not match the layout");
  }
  if (!(x(layout.tf()) > 0.0)) throw DomainError("t_f must be positive");
}

Eigen::VectorXd torque_at(const RobotModel& model, const Eigen::MatrixXd& a,
                          const Eigen::Matrix<double, Eigen::Dynamic, 3>& b, double t_f) {
  const Eigen::VectorXd q = a * b.col(0), dq = a * b.col(1), ddq = a * b.col(2);
  return detail::scaled_rnea<double>(model, q, dq, ddq, t_f);
}

// Fills rows [p n, p n + n) of jac for grid point p.
void jacobian_at(const RobotModel& model, const DecisionLayout& layout, const Eigen::MatrixXd& a,
                 const Eigen::Matrix<double, Eigen::Dynamic, 3>& b, double t_f, int p, Eigen::MatrixXd& jac) {
  const int n = layout.n;
  const Eigen::VectorXd q = a * b.col(0), dq = a * b.col(1), ddq = a * b.col(2);
  VecX<Dual> qv(n), dqv(n), ddqv(n);
  for (int i = 0; i < n; ++i) {
    qv(i) = q(i);
    dqv(i) = dq(i);
    ddqv(i) = ddq(i);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < layout.m; ++j) {
      if (b(j, 0) == 0.0 && b(j, 1) == 0.0 && b(j, 2) == 0.0) continue;
      qv(i).d = b(j, 0);
      dqv(i).d = b(j, 1);
      ddqv(i).d = b(j, 2);
      const VecX<Dual> tau = detail::scaled_rnea<Dual>(model, qv, dqv, ddqv, Dual(t_f));
      for (int r = 0; r < n; ++r) jac(p * n + r, layout.a(i, j)) = tau(r).d;
    }
    qv(i).d = dqv(i).d = ddqv(i).d = 0.0;
  }
  const VecX<Dual> tau = detail::scaled_rnea<Dual>(model, qv, dqv, ddqv, Dual::variable(t_f));
  for (int r = 0; r < n; ++r) jac(p * n + r, layout.tf()) = tau(r).d;
}

}  // namespace

GridBasis tabulate(const BasisSpec& spec, const Eigen::VectorXd& grid) {
  GridBasis out;
  out.s = grid;
  out.values.reserve(grid.size());
  for (Eigen::Index p = 0; p < grid.size(); ++p) out.values.push_back(eval_basis_all(spec, grid(p)));
  return out;
}

Eigen::MatrixXd torque_grid_serial(const RobotModel& model, const GridBasis& basis, const DecisionLayout& layout,
                                   const Eigen::VectorXd& x) {
  check_sizes(model, basis, layout, x);
  const Eigen::MatrixXd a = layout.coefficients(x);
  const double t_f = x(layout.tf());
  Eigen::MatrixXd out(layout.n, basis.size());
  for (int p = 0; p < basis.size(); ++p) out.col(p) = torque_at(model, a, basis.values[p], t_f);
  return out;
}

Eigen::MatrixXd torque_grid_parallel(const RobotModel& model, const GridBasis& basis, const DecisionLayout& layout,
                                     const Eigen::VectorXd& x) {
  check_sizes(model, basis, layout, x);
  const Eigen::MatrixXd a = layout.coefficients(x);
  const double t_f = x(layout.tf());
  Eigen::MatrixXd out(layout.n, basis.size());
  const int count = basis.size();
#pragma omp parallel for schedule(static)
  for (int p = 0; p < count; ++p) out.col(p) = torque_at(model, a, basis.values[p], t_f);
  return out;
}

Eigen::MatrixXd torque_jacobian_serial(const RobotModel& model, const GridBasis& basis, const DecisionLayout& layout,
                                       const Eigen::VectorXd& x) {
  check_sizes(model, basis, layout, x);
  const Eigen::MatrixXd a = layout.coefficients(x);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(basis.size()) * layout.n, layout.size());
  for (int p = 0; p < basis.size(); ++p) jacobian_at(model, layout, a, basis.values[p], x(layout.tf()), p, jac);
  return jac;
}

Eigen::MatrixXd torque_jacobian_parallel(const RobotModel& model, const GridBasis& basis,
                                         const DecisionLayout& layout, const Eigen::VectorXd& x) {
  check_sizes(model, basis, layout, x);
  const Eigen::MatrixXd a = layout.coefficients(x);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(basis.size()) * layout.n, layout.size());
  const int count = basis.size();
  const double t_f = x(layout.tf());
#pragma omp parallel for schedule(dynamic)
  for (int p = 0; p < count; ++p) jacobian_at(model, layout, a, basis.values[p], t_f, p, jac);
  return jac;
}

}  // namespace flatplan
