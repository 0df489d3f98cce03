#include "flatplan/lp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <vector>

#include <Eigen/LU>

#include "flatplan/errors.hpp"

namespace flatplan {

LinearProgram::LinearProgram(int num_vars)
    : objective(Eigen::VectorXd::Zero(num_vars)),
      constraints(num_vars),
      var_lower(Eigen::VectorXd::Constant(num_vars, -kInf)),
      var_upper(Eigen::VectorXd::Constant(num_vars, kInf)) {}

int LinearProgram::num_equalities() const {
  return static_cast<int>(std::count_if(constraints.rows.begin(), constraints.rows.end(),
                                        [](const LinearRow& r) { return r.is_equality(); }));
}

int LinearProgram::num_one_sided_inequalities() const {
  int count = 0;
  for (const LinearRow& r : constraints.rows) {
    if (r.is_equality()) continue;
    count += std::isfinite(r.lower) + std::isfinite(r.upper);
  }
  return count;
}

void LinearProgram::add_constraints(const LinearConstraintSet& set, bool fold_unit_rows) {
  for (const LinearRow& row : set.rows) {
    int nonzero = 0, index = -1;
    for (Eigen::Index j = 0; j < row.coeffs.size(); ++j) {
      if (row.coeffs(j) != 0.0) {
        ++nonzero;
        index = static_cast<int>(j);
      }
    }
    if (fold_unit_rows && nonzero == 1 && row.coeffs(index) == 1.0) {
      var_lower(index) = std::max(var_lower(index), row.lower);
      var_upper(index) = std::min(var_upper(index), row.upper);
    } else {
      constraints.rows.push_back(row);
    }
  }
}

double LinearProgram::max_violation(const Eigen::VectorXd& x) const {
  double worst = constraints.max_violation(x);
  for (int j = 0; j < num_vars(); ++j) {
    worst = std::max({worst, var_lower(j) - x(j), x(j) - var_upper(j)});
  }
  return worst;
}

LinearConstraintSet sampled_state_rows(const BasisSpec& spec, const JointLimits& limits, const Eigen::VectorXd& grid) {
  const int n = static_cast<int>(limits.q_lb.size());
  const DecisionLayout layout{n, spec.m};
  LinearConstraintSet sampled(layout.size());
  for (Eigen::Index p = 0; p < grid.size(); ++p) {
    const Eigen::VectorXd b = eval_basis(spec, grid(p), 0);
    const Eigen::VectorXd db = eval_basis(spec, grid(p), 1);
    for (int i = 0; i < n; ++i) {
      const std::string tag = " joint " + std::to_string(i + 1) + " s=" + std::to_string(grid(p));
      Eigen::VectorXd pos = Eigen::VectorXd::Zero(layout.size());
      Eigen::VectorXd vel = Eigen::VectorXd::Zero(layout.size());
      for (int j = 0; j < spec.m; ++j) {
        pos(layout.a(i, j)) = b(j);
        vel(layout.a(i, j)) = db(j);
      }
      sampled.add(pos, limits.q_lb(i), limits.q_ub(i), "q" + tag);
      Eigen::VectorXd upper = vel;
      upper(layout.tf()) = -limits.qd_ub(i);
      sampled.add(std::move(upper), -kInf, 0.0, "qd upper" + tag);
      vel(layout.tf()) = -limits.qd_lb(i);
      sampled.add(std::move(vel), 0.0, kInf, "qd lower" + tag);
    }
  }
  return sampled;
}

LinearProgram build_time_optimal_lp(const BasisSpec& spec, const BoundaryConditions& bc, const JointLimits& limits,
                                    const Eigen::VectorXd& grid, const LpBuildOptions& options) {
  const int n = static_cast<int>(bc.q0.size());
  limits.validate(n);
  if (!(options.t_min > 0.0)) throw ConfigError("t_min must be positive");
  const DecisionLayout layout{n, spec.m};
  LinearProgram lp(layout.size());
  lp.objective(layout.tf()) = 1.0;
  lp.var_lower(layout.tf()) = options.t_min;
  if (options.fixed_tf) {
    if (*options.fixed_tf < options.t_min) throw ConfigError("fixed t_f is below t_min");
    lp.var_lower(layout.tf()) = lp.var_upper(layout.tf()) = *options.fixed_tf;
  }
  lp.add_constraints(boundary_constraint_rows(spec, bc));

  if (options.mode == ConstraintMode::hull) {
    lp.add_constraints(hull_bounds_position(spec, limits.q_lb, limits.q_ub), true);
    lp.add_constraints(hull_bounds_velocity(spec, limits.qd_lb, limits.qd_ub));
    return lp;
  }

  if (grid.size() < 2) throw ConfigError("sample grid needs at least 2 points");
  lp.add_constraints(sampled_state_rows(spec, limits, grid));
  return lp;
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal:
      return "optimal";
    case LpStatus::infeasible:
      return "infeasible";
    case LpStatus::unbounded:
      return "unbounded";
    case LpStatus::iteration_limit:
      return "iteration_limit";
  }
  return "unknown";
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// x_j = offset + sum over (column, sign) of sign * y_column, y >= 0.
struct VarMap {
  double offset = 0.0;
  int col_a = -1;
  double sign_a = 1.0;
  int col_b = -1;  // second column of a split free variable (sign -1)
};

// Equality form  A y = b, y >= 0, b >= 0, with columns: structural, slack.
struct StandardForm {
  RowMatrix a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  std::vector<VarMap> vars;
  std::vector<int> initial_basic;  // a +1 slack usable as the starting basis, or -1
  int structural = 0;
  std::vector<int> slack_of_row;  // slack column of each row, or -1
};

StandardForm to_standard_form(const LinearProgram& lp) {
  StandardForm sf;
  const int nv = lp.num_vars();
  int cols = 0;
  sf.vars.resize(nv);
  struct UpperRow {
    int col;
    double rhs;
  };
  std::vector<UpperRow> upper_rows;
  for (int j = 0; j < nv; ++j) {
    const double lo = lp.var_lower(j), hi = lp.var_upper(j);
    if (lo > hi) {
      // An empty box; encode as an infeasible pair of rows on a fresh column.
      sf.vars[j] = {lo, cols++, 1.0, -1};
      upper_rows.push_back({sf.vars[j].col_a, hi - lo});
      continue;
    }
    VarMap& vm = sf.vars[j];
    if (std::isfinite(lo) && lo == hi) {
      vm.offset = lo;
    } else if (std::isfinite(lo) && std::isfinite(hi) && lo < 0.0 && hi > 0.0) {
      // Split around zero so a start at the origin needs no artificials.
      vm = {0.0, cols, 1.0, cols + 1};
      upper_rows.push_back({cols, hi});
      upper_rows.push_back({cols + 1, -lo});
      cols += 2;
    } else if (std::isfinite(lo)) {
      vm = {lo, cols++, 1.0, -1};
      if (std::isfinite(hi)) upper_rows.push_back({vm.col_a, hi - lo});
    } else if (std::isfinite(hi)) {
      vm = {hi, cols++, -1.0, -1};
    } else {
      vm = {0.0, cols, 1.0, cols + 1};
      cols += 2;
    }
  }
  const int structural = cols;

  struct Pending {
    Eigen::VectorXd coeffs;  // over structural columns
    double rhs;
    int slack_sign;  // 0 none, +1 or -1
  };
  std::vector<Pending> rows;
  for (const UpperRow& u : upper_rows) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(structural);
    r(u.col) = 1.0;
    rows.push_back({r, u.rhs, +1});
  }
  for (const LinearRow& row : lp.constraints.rows) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(structural);
    double shift = 0.0;
    for (int j = 0; j < nv; ++j) {
      const double a = row.coeffs(j);
      if (a == 0.0) continue;
      const VarMap& vm = sf.vars[j];
      shift += a * vm.offset;
      if (vm.col_a >= 0) r(vm.col_a) += a * vm.sign_a;
      if (vm.col_b >= 0) r(vm.col_b) -= a;
    }
    if (row.is_equality()) {
      rows.push_back({r, row.lower - shift, 0});
      continue;
    }
    if (std::isfinite(row.lower)) rows.push_back({r, row.lower - shift, -1});
    if (std::isfinite(row.upper)) rows.push_back({r, row.upper - shift, +1});
  }

  int slacks = 0;
  for (const Pending& p : rows) slacks += p.slack_sign != 0;
  const int nrows = static_cast<int>(rows.size());
  sf.a = RowMatrix::Zero(nrows, structural + slacks);
  sf.b.resize(nrows);
  sf.initial_basic.assign(nrows, -1);
  sf.slack_of_row.assign(nrows, -1);
  sf.structural = structural;
  int slack = structural;
  for (int r = 0; r < nrows; ++r) {
    const Pending& p = rows[r];
    // Flip to rhs >= 0; a zero rhs flips too when that makes the slack +1.
    const double flip = p.rhs < 0.0 || (p.rhs == 0.0 && p.slack_sign < 0) ? -1.0 : 1.0;
    sf.a.row(r).head(structural) = flip * p.coeffs.transpose();
    sf.b(r) = flip * p.rhs;
    if (p.slack_sign != 0) {
      sf.a(r, slack) = flip * p.slack_sign;
      sf.slack_of_row[r] = slack;
      if (sf.a(r, slack) > 0.0) sf.initial_basic[r] = slack;
      ++slack;
    }
  }

  sf.c = Eigen::VectorXd::Zero(structural + slacks);
  for (int j = 0; j < nv; ++j) {
    const VarMap& vm = sf.vars[j];
    if (vm.col_a >= 0) sf.c(vm.col_a) += lp.objective(j) * vm.sign_a;
    if (vm.col_b >= 0) sf.c(vm.col_b) -= lp.objective(j);
  }
  return sf;
}

// Condensed (Tucker) tableau: one row per basic variable, one column per
// nonbasic variable,  x_B[r] + sum_c T(r, c) x_N[c] = rhs(r).  The last row
// holds the reduced costs with rhs -z.  Artificial columns sit after the real
// ones and never re-enter once they leave the basis.
class Tableau {
 public:
  Tableau(const StandardForm& sf, const SimplexOptions& opt) : opt_(opt) {
    rows_ = static_cast<int>(sf.a.rows());
    real_cols_ = static_cast<int>(sf.a.cols());
    basis_.assign(rows_, -1);
    std::vector<char> is_basic(real_cols_, 0);
    int art = real_cols_;
    for (int r = 0; r < rows_; ++r) {
      if (sf.initial_basic[r] >= 0) {
        basis_[r] = sf.initial_basic[r];
        is_basic[basis_[r]] = 1;
      } else {
        basis_[r] = art++;
      }
    }
    cols_ = art;
    for (int j = 0; j < real_cols_; ++j) {
      if (!is_basic[j]) nonbasic_.push_back(j);
    }
    const int width = static_cast<int>(nonbasic_.size());
    t_ = RowMatrix::Zero(rows_ + 1, width + 1);
    for (int c = 0; c < width; ++c) t_.col(c).head(rows_) = sf.a.col(nonbasic_[c]);
    t_.col(width).head(rows_) = sf.b;
  }

  int rows() const { return rows_; }
  int real_cols() const { return real_cols_; }
  int cols() const { return cols_; }
  const std::vector<int>& basis() const { return basis_; }
  double rhs(int r) const { return t_(r, width()); }
  int iterations() const { return iterations_; }

  /// Prices cost vector c (length cols) into the objective row.
  void set_objective(const Eigen::VectorXd& c) {
    const int w = width();
    t_.row(rows_).setZero();
    for (int k = 0; k < w; ++k) t_(rows_, k) = c(nonbasic_[k]);
    for (int r = 0; r < rows_; ++r) {
      const double cb = c(basis_[r]);
      if (cb != 0.0) t_.row(rows_) -= cb * t_.row(r);
    }
  }

  double objective_value() const { return -t_(rows_, width()); }

  enum class Outcome { optimal, unbounded, iteration_limit };

  Outcome run() {
    const int w = width();
    int degenerate_run = 0;
    while (true) {
      if (iterations_ >= opt_.max_iterations) return Outcome::iteration_limit;
      const bool bland = degenerate_run >= opt_.degenerate_switch;
      int enter = -1;
      double best = -opt_.cost_tol;
      for (int k = 0; k < w; ++k) {
        if (nonbasic_[k] >= real_cols_) continue;
        const double d = t_(rows_, k);
        if (d >= -opt_.cost_tol) continue;
        const bool take = bland ? (enter < 0 || nonbasic_[k] < nonbasic_[enter])
                                : (d < best || (d == best && enter >= 0 && nonbasic_[k] < nonbasic_[enter]));
        if (take) {
          enter = k;
          best = d;
        }
      }
      if (enter < 0) return Outcome::optimal;

      int leave = -1;
      double ratio = 0.0;
      for (int r = 0; r < rows_; ++r) {
        const double a = t_(r, enter);
        if (a <= opt_.pivot_tol) continue;
        const double q = std::max(0.0, t_(r, w)) / a;
        if (leave < 0 || q < ratio || (q == ratio && basis_[r] < basis_[leave])) {
          leave = r;
          ratio = q;
        }
      }
      if (leave < 0) return Outcome::unbounded;
      degenerate_run = ratio <= 1e-12 ? degenerate_run + 1 : 0;
      pivot(leave, enter);
    }
  }

  void pivot(int pr, int pc) {
    ++iterations_;
    const double p = t_(pr, pc);
    t_.row(pr) /= p;
    t_(pr, pc) = 1.0 / p;
    const auto pivot_row = t_.row(pr);
    const int total = rows_ + 1;
    const Eigen::Index width = t_.cols();
#pragma omp parallel for schedule(static) if (static_cast<long>(total) * width > 200000)
    for (int r = 0; r < total; ++r) {
      if (r == pr) continue;
      const double f = t_(r, pc);
      if (f == 0.0) continue;
      t_.row(r) -= f * pivot_row;
      t_(r, pc) = -f / p;
    }
    std::swap(basis_[pr], nonbasic_[pc]);
  }

  /// Pivots basic artificials out where a real column can replace them.
  void drive_out_artificials() {
    for (int r = 0; r < rows_; ++r) {
      if (basis_[r] < real_cols_) continue;
      int best = -1;
      for (int k = 0; k < width(); ++k) {
        if (nonbasic_[k] >= real_cols_) continue;
        const double v = std::abs(t_(r, k));
        if (v > opt_.pivot_tol && (best < 0 || v > std::abs(t_(r, best)))) best = k;
      }
      if (best >= 0) pivot(r, best);
    }
  }

 private:
  int width() const { return static_cast<int>(nonbasic_.size()); }

  SimplexOptions opt_;
  int rows_ = 0, real_cols_ = 0, cols_ = 0;
  int iterations_ = 0;
  RowMatrix t_;
  std::vector<int> basis_, nonbasic_;
};

Eigen::VectorXd recover(const StandardForm& sf, const Eigen::VectorXd& y, int nv) {
  Eigen::VectorXd x(nv);
  for (int j = 0; j < nv; ++j) {
    const VarMap& vm = sf.vars[j];
    double v = vm.offset;
    if (vm.col_a >= 0) v += vm.sign_a * y(vm.col_a);
    if (vm.col_b >= 0) v -= y(vm.col_b);
    x(j) = v;
  }
  return x;
}

// Re-solves the final basis from the untouched standard form to drop
// round-off accumulated in the tableau. Rows whose slack is nonbasic fix the
// basic structural columns; the basic slacks follow from the residuals.
Eigen::VectorXd basic_solution(const StandardForm& sf, const Tableau& tab) {
  const int rows = tab.rows();
  const int real = tab.real_cols();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(real);
  for (int r = 0; r < rows; ++r) {
    if (tab.basis()[r] < real) y(tab.basis()[r]) = std::max(0.0, tab.rhs(r));
  }
  if (rows == 0) return y;
  std::vector<char> basic(real, 0);
  std::vector<int> structural;
  for (int r = 0; r < rows; ++r) {
    const int col = tab.basis()[r];
    if (col >= real) return y;  // redundant rows remain; keep the tableau values
    basic[col] = 1;
    if (col < sf.structural) structural.push_back(col);
  }
  std::sort(structural.begin(), structural.end());
  std::vector<int> tight;
  for (int r = 0; r < rows; ++r) {
    if (sf.slack_of_row[r] < 0 || !basic[sf.slack_of_row[r]]) tight.push_back(r);
  }
  const int k = static_cast<int>(structural.size());
  if (static_cast<int>(tight.size()) != k) return y;
  Eigen::VectorXd ys = Eigen::VectorXd::Zero(k);
  if (k > 0) {
    Eigen::MatrixXd m(k, k);
    Eigen::VectorXd rhs(k);
    for (int i = 0; i < k; ++i) {
      rhs(i) = sf.b(tight[i]);
      for (int j = 0; j < k; ++j) m(i, j) = sf.a(tight[i], structural[j]);
    }
    ys = Eigen::PartialPivLU<Eigen::MatrixXd>(m).solve(rhs);
    if (!ys.allFinite() || (m * ys - rhs).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + rhs.cwiseAbs().maxCoeff())) return y;
  }
  const double tol = 1e-9 * (1.0 + sf.b.cwiseAbs().maxCoeff());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(real);
  for (int j = 0; j < k; ++j) {
    if (ys(j) < -tol) return y;
    out(structural[j]) = std::max(0.0, ys(j));
  }
  for (int r = 0; r < rows; ++r) {
    const int s = sf.slack_of_row[r];
    if (s < 0 || !basic[s]) continue;
    double resid = sf.b(r);
    for (int j = 0; j < k; ++j) resid -= sf.a(r, structural[j]) * ys(j);
    const double v = resid / sf.a(r, s);
    if (v < -tol) return y;
    out(s) = std::max(0.0, v);
  }
  return out;
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options) {
  const int nv = lp.num_vars();
  if (lp.constraints.num_vars != nv || lp.var_lower.size() != nv || lp.var_upper.size() != nv) {
    throw ConfigError("solve_lp: inconsistent LP dimensions");
  }
  const StandardForm sf = to_standard_form(lp);
  Tableau tab(sf, options);
  LpSolution out;

  Eigen::VectorXd phase_one = Eigen::VectorXd::Zero(tab.cols());
  phase_one.tail(tab.cols() - tab.real_cols()).setOnes();
  tab.set_objective(phase_one);
  if (tab.run() == Tableau::Outcome::iteration_limit) {
    out.status = LpStatus::iteration_limit;
    out.iterations = tab.iterations();
    return out;
  }
  out.phase_one_objective = std::max(0.0, tab.objective_value());
  const double scale = 1.0 + (sf.b.size() ? sf.b.cwiseAbs().maxCoeff() : 0.0);
  if (out.phase_one_objective > options.feasibility_tol * scale) {
    out.status = LpStatus::infeasible;
    out.iterations = tab.iterations();
    return out;
  }
  tab.drive_out_artificials();

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(tab.cols());
  cost.head(tab.real_cols()) = sf.c;
  tab.set_objective(cost);
  const auto outcome = tab.run();
  out.iterations = tab.iterations();
  if (outcome == Tableau::Outcome::unbounded) {
    out.status = LpStatus::unbounded;
    return out;
  }
  if (outcome == Tableau::Outcome::iteration_limit) {
    out.status = LpStatus::iteration_limit;
    return out;
  }
  out.status = LpStatus::optimal;
  out.x = recover(sf, basic_solution(sf, tab), nv);
  out.objective = lp.objective.dot(out.x);
  out.max_violation = lp.max_violation(out.x);
  return out;
}

void write_lp_text(std::ostream& os, const LinearProgram& lp) {
  os << std::setprecision(17);
  os << "variables " << lp.num_vars() << "\n";
  os << "minimize";
  for (int j = 0; j < lp.num_vars(); ++j) {
    if (lp.objective(j) != 0.0) os << " " << lp.objective(j) << "*x" << j;
  }
  os << "\nsubject to " << lp.constraints.rows.size() << "\n";
  for (std::size_t r = 0; r < lp.constraints.rows.size(); ++r) {
    const LinearRow& row = lp.constraints.rows[r];
    os << "r" << r << ": " << row.lower << " <=";
    for (int j = 0; j < lp.num_vars(); ++j) {
      if (row.coeffs(j) != 0.0) os << " " << row.coeffs(j) << "*x" << j;
    }
    os << " <= " << row.upper;
    if (!row.label.empty()) os << "  # " << row.label;
    os << "\n";
  }
  os << "bounds\n";
  for (int j = 0; j < lp.num_vars(); ++j) {
    os << lp.var_lower(j) << " <= x" << j << " <= " << lp.var_upper(j) << "\n";
  }
}

}  // namespace flatplan
