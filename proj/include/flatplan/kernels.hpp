// Batched torque evaluation over the sample grid.
//
// Each kernel has a serial reference and an OpenMP version. Grid points are
// independent and every output entry is written by exactly one thread, so
// both produce bit-identical results.

#pragma once

#include <vector>

#include <Eigen/Core>

#include "flatplan/basis.hpp"
#include "flatplan/constraints.hpp"
#include "flatplan/model.hpp"

namespace flatplan {

/// b, b', b'' tabulated at each grid point (one m x 3 block per point).
struct GridBasis {
  Eigen::VectorXd s;
  std::vector<Eigen::Matrix<double, Eigen::Dynamic, 3>> values;

  int size() const { return static_cast<int>(s.size()); }
};

GridBasis tabulate(const BasisSpec& spec, const Eigen::VectorXd& grid);

/// n x N matrix of time-scaled torques at decision vector x.
Eigen::MatrixXd torque_grid_serial(const RobotModel& model, const GridBasis& basis, const DecisionLayout& layout,
                                   const Eigen::VectorXd& x);
Eigen::MatrixXd torque_grid_parallel(const RobotModel& model, const GridBasis& basis, const DecisionLayout& layout,
                                     const Eigen::VectorXd& x);

/// (N n) x size() Jacobian of the torques; row p n + i is joint i at point p.
/// Forward-mode AD with one seed per decision variable; seeds whose basis
/// entries vanish at a point are skipped since their column is exactly zero.
Eigen::MatrixXd torque_jacobian_serial(const RobotModel& model, const GridBasis& basis, const DecisionLayout& layout,
                                       const Eigen::VectorXd& x);
Eigen::MatrixXd torque_jacobian_parallel(const RobotModel& model, const GridBasis& basis,
                                         const DecisionLayout& layout, const Eigen::VectorXd& x);

}  // namespace flatplan
