#include "flatplan/constraints.hpp"

#include <algorithm>
#include <cassert>

namespace flatplan {

Eigen::VectorXd DecisionLayout::pack(const Eigen::MatrixXd& coeffs, double t_f) const {
  Eigen::VectorXd x(size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) x(a(i, j)) = coeffs(i, j);
  x(tf()) = t_f;
  return x;
}

Eigen::MatrixXd DecisionLayout::coefficients(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd out(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out(i, j) = x(a(i, j));
  return out;
}

double LinearRow::violation(const Eigen::VectorXd& x) const {
  const double v = coeffs.dot(x);
  return std::max({0.0, lower - v, v - upper});
}

LinearRow& LinearConstraintSet::add(Eigen::VectorXd coeffs, double lower, double upper, std::string label) {
  assert(coeffs.size() == num_vars);
  rows.push_back({std::move(coeffs), lower, upper, std::move(label)});
  return rows.back();
}

void LinearConstraintSet::append(const LinearConstraintSet& other) {
  assert(other.num_vars == num_vars);
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

std::vector<int> LinearConstraintSet::violated_rows(const Eigen::VectorXd& x, double tol) const {
  std::vector<int> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].violation(x) > tol) out.push_back(static_cast<int>(r));
  }
  return out;
}

double LinearConstraintSet::max_violation(const Eigen::VectorXd& x) const {
  double worst = 0.0;
  for (const LinearRow& row : rows) worst = std::max(worst, row.violation(x));
  return worst;
}

}  // namespace flatplan
