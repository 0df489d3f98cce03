#include "flatplan/basis.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "flatplan/errors.hpp"

namespace flatplan {

namespace {

// Cox-de Boor order-1 indicators; half-open spans except the last non-empty
// span, which is closed at s = 1.
std::vector<double> order_one(const Eigen::VectorXd& t, double s) {
  const int spans = static_cast<int>(t.size()) - 1;
  std::vector<double> out(spans, 0.0);
  if (s >= t(spans)) {
    for (int i = spans - 1; i >= 0; --i) {
      if (t(i) < t(i + 1)) {
        out[i] = 1.0;
        break;
      }
    }
    return out;
  }
  for (int i = 0; i < spans; ++i) {
    if (t(i) <= s && s < t(i + 1)) {
      out[i] = 1.0;
      break;
    }
  }
  return out;
}

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

// deriv-th derivative of every order-p basis function on knots t.
std::vector<double> bspline_table(const Eigen::VectorXd& t, double s, int p, int deriv) {
  if (p == 1) {
    std::vector<double> base = order_one(t, s);
    if (deriv > 0) std::fill(base.begin(), base.end(), 0.0);
    return base;
  }
  const int count = static_cast<int>(t.size()) - p;
  std::vector<double> lower = bspline_table(t, s, p - 1, deriv > 0 ? deriv - 1 : 0);
  std::vector<double> out(count, 0.0);
  for (int i = 0; i < count; ++i) {
    const double left = t(i + p - 1) - t(i);
    const double right = t(i + p) - t(i + 1);
    if (deriv == 0) {
      out[i] = safe_ratio(s - t(i), left) * lower[i] + safe_ratio(t(i + p) - s, right) * lower[i + 1];
    } else {
      out[i] = (p - 1) * (safe_ratio(lower[i], left) - safe_ratio(lower[i + 1], right));
    }
  }
  return out;
}

void check_limits(const Eigen::VectorXd& lb, const Eigen::VectorXd& ub, const char* what) {
  if (lb.size() != ub.size()) throw ConfigError(std::string(what) + ": bound vectors differ in length");
  for (Eigen::Index i = 0; i < lb.size(); ++i) {
    if (lb(i) > ub(i)) throw ConfigError(std::string(what) + ": lower bound exceeds upper bound");
  }
}

}  // namespace

BasisSpec BasisSpec::polynomial(int m) {
  BasisSpec spec;
  spec.family = BasisFamily::polynomial;
  spec.m = m;
  spec.validate();
  return spec;
}

BasisSpec BasisSpec::bspline(int k, int m, Eigen::VectorXd knots) {
  BasisSpec spec;
  spec.family = BasisFamily::bspline;
  spec.k = k;
  spec.m = m;
  spec.knots = knots.size() == 0 ? clamped_knots(k, m) : std::move(knots);
  spec.validate();
  return spec;
}

void BasisSpec::validate() const {
  if (family == BasisFamily::polynomial) {
    if (m < 4) throw ConfigError("polynomial basis needs m >= 4");
    return;
  }
  if (k < 2) throw ConfigError("B-spline order k must be >= 2");
  if (m < k) throw ConfigError("B-spline needs m >= k");
  if (knots.size() != m + k) throw ConfigError("knot vector must have m + k entries");
  for (Eigen::Index i = 1; i < knots.size(); ++i) {
    if (knots(i) < knots(i - 1)) throw ConfigError("knot vector must be non-decreasing");
  }
  for (int i = 0; i < k; ++i) {
    if (knots(i) != 0.0 || knots(m + i) != 1.0) {
      throw ConfigError("knot vector must be clamped: k zeros and k ones at the ends");
    }
  }
  for (int i = k; i < m; ++i) {
    int mult = 1;
    while (i + mult < m && knots(i + mult) == knots(i)) ++mult;
    if (mult >= k) throw ConfigError("interior knot multiplicity must be below k");
  }
}

Eigen::VectorXd clamped_knots(int k, int m) {
  if (k < 1 || m < k) throw ConfigError("clamped_knots needs m >= k >= 1");
  Eigen::VectorXd t(m + k);
  const int interior = m - k;
  for (int i = 0; i < k; ++i) {
    t(i) = 0.0;
    t(m + i) = 1.0;
  }
  for (int j = 1; j <= interior; ++j) t(k + j - 1) = static_cast<double>(j) / (interior + 1);
  return t;
}

Eigen::VectorXd eval_basis(const BasisSpec& spec, double s, int deriv) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("eval_basis: s outside [0, 1]");
  if (deriv < 0 || deriv > 2) throw DomainError("eval_basis: derivative order must be 0, 1 or 2");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(spec.m);
  if (spec.family == BasisFamily::polynomial) {
    for (int j = deriv; j < spec.m; ++j) {
      double c = 1.0;
      for (int d = 0; d < deriv; ++d) c *= j - d;
      out(j) = c * std::pow(s, j - deriv);
    }
    return out;
  }
  const std::vector<double> table = bspline_table(spec.knots, s, spec.k, deriv);
  for (int j = 0; j < spec.m; ++j) out(j) = table[j];
  return out;
}

Eigen::Matrix<double, Eigen::Dynamic, 3> eval_basis_all(const BasisSpec& spec, double s) {
  Eigen::Matrix<double, Eigen::Dynamic, 3> out(spec.m, 3);
  for (int d = 0; d < 3; ++d) out.col(d) = eval_basis(spec, s, d);
  return out;
}

LinearConstraintSet hull_bounds_position(const BasisSpec& spec, const Eigen::VectorXd& q_lb,
                                         const Eigen::VectorXd& q_ub) {
  if (spec.family != BasisFamily::bspline) {
    throw ConfigError("hull constraints need a B-spline basis; use sampled constraints");
  }
  check_limits(q_lb, q_ub, "position hull");
  const DecisionLayout layout{static_cast<int>(q_lb.size()), spec.m};
  LinearConstraintSet out(layout.size());
  for (int i = 0; i < layout.n; ++i) {
    for (int j = 0; j < spec.m; ++j) {
      out.add(Eigen::VectorXd::Unit(layout.size(), layout.a(i, j)), q_lb(i), q_ub(i),
              "q hull joint " + std::to_string(i + 1) + " ctrl " + std::to_string(j + 1));
    }
  }
  return out;
}

LinearConstraintSet hull_bounds_velocity(const BasisSpec& spec, const Eigen::VectorXd& qd_lb,
                                         const Eigen::VectorXd& qd_ub) {
  if (spec.family != BasisFamily::bspline) {
    throw ConfigError("hull constraints need a B-spline basis; use sampled constraints");
  }
  check_limits(qd_lb, qd_ub, "velocity hull");
  const DecisionLayout layout{static_cast<int>(qd_lb.size()), spec.m};
  LinearConstraintSet out(layout.size());
  const int k = spec.k;
  for (int i = 0; i < layout.n; ++i) {
    for (int j = 0; j + 1 < spec.m; ++j) {
      const double gap = spec.knots(j + k) - spec.knots(j + 1);
      if (gap <= 0.0) continue;
      Eigen::VectorXd row = Eigen::VectorXd::Zero(layout.size());
      row(layout.a(i, j + 1)) = (k - 1) / gap;
      row(layout.a(i, j)) = -(k - 1) / gap;
      const std::string tag = " joint " + std::to_string(i + 1) + " ctrl " + std::to_string(j + 1);
      Eigen::VectorXd upper = row;
      upper(layout.tf()) = -qd_ub(i);
      out.add(std::move(upper), -kInf, 0.0, "qd hull upper" + tag);
      row(layout.tf()) = -qd_lb(i);
      out.add(std::move(row), 0.0, kInf, "qd hull lower" + tag);
    }
  }
  return out;
}

Eigen::VectorXd uniform_grid(int count) {
  if (count < 2) throw ConfigError("sample grid needs at least 2 points");
  Eigen::VectorXd s(count);
  for (int i = 0; i < count; ++i) s(i) = static_cast<double>(i) / (count - 1);
  s(count - 1) = 1.0;
  return s;
}

}  // namespace flatplan
