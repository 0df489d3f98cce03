// Affine constraints over the flattened planner unknowns (A entries, t_f).

#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace flatplan {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Index map for the decision vector x = (a_11, ..., a_1m, a_21, ..., a_nm, t_f).
struct DecisionLayout {
  int n = 0;  // joints
  int m = 0;  // basis functions

  int a(int joint, int basis) const { return joint * m + basis; }
  int tf() const { return n * m; }
  int size() const { return n * m + 1; }

  Eigen::VectorXd pack(const Eigen::MatrixXd& coeffs, double t_f) const;
  Eigen::MatrixXd coefficients(const Eigen::VectorXd& x) const;
};

/// lower <= coeffs . x <= upper; an equality when lower == upper.
struct LinearRow {
  Eigen::VectorXd coeffs;
  double lower = -kInf;
  double upper = kInf;
  std::string label;

  bool is_equality() const { return lower == upper; }
  double violation(const Eigen::VectorXd& x) const;
};

struct LinearConstraintSet {
  int num_vars = 0;
  std::vector<LinearRow> rows;

  explicit LinearConstraintSet(int vars = 0) : num_vars(vars) {}

  LinearRow& add(Eigen::VectorXd coeffs, double lower, double upper, std::string label = {});
  void append(const LinearConstraintSet& other);

  /// Row indices violated by more than tol.
  std::vector<int> violated_rows(const Eigen::VectorXd& x, double tol) const;
  double max_violation(const Eigen::VectorXd& x) const;
};

}  // namespace flatplan
