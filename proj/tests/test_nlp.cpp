#include <doctest.h>

#include <random>

#include "flatplan/kernels.hpp"
#include "flatplan/nlp.hpp"
#include "test_helpers.hpp"

using namespace flatplan;

namespace {

// min x1^2 + x2^2  s.t.  x1 + x2 = 2.
NlpProblem circle_problem() {
  NlpProblem pb;
  pb.num_vars = 2;
  pb.objective = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  pb.objective_gradient = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(2.0 * x); };
  pb.linear = LinearConstraintSet(2);
  pb.linear.add(Eigen::Vector2d(1.0, 1.0), 2.0, 2.0);
  return pb;
}

// min -x1 - x2  s.t.  x1^2 + x2^2 <= 1: optimum (1, 1) / sqrt(2) on a curved boundary.
NlpProblem disc_problem() {
  NlpProblem pb;
  pb.num_vars = 2;
  pb.objective = [](const Eigen::VectorXd& x) { return -x.sum(); };
  pb.objective_gradient = [](const Eigen::VectorXd&) { return Eigen::VectorXd(Eigen::Vector2d(-1.0, -1.0)); };
  pb.nonlinear = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, x.squaredNorm()); };
  pb.nonlinear_jacobian = [](const Eigen::VectorXd& x) { return Eigen::MatrixXd(2.0 * x.transpose()); };
  pb.nonlinear_lower = Eigen::VectorXd::Constant(1, -kInf);
  pb.nonlinear_upper = Eigen::VectorXd::Constant(1, 1.0);
  return pb;
}

// Mean squared grid torque of the reference arm for x = (A, t_f).
template <typename S>
S torque_objective(const RobotModel& model, const GridBasis& grid, const DecisionLayout& layout,
                   const VecX<S>& x) {
  S total = 0.0;
  for (int p = 0; p < grid.size(); ++p) {
    const auto& b = grid.values[p];
    VecX<S> q = VecX<S>::Zero(layout.n), dq = q, ddq = q;
    for (int i = 0; i < layout.n; ++i) {
      for (int j = 0; j < layout.m; ++j) {
        q(i) += x(layout.a(i, j)) * b(j, 0);
        dq(i) += x(layout.a(i, j)) * b(j, 1);
        ddq(i) += x(layout.a(i, j)) * b(j, 2);
      }
    }
    const VecX<S> tau = detail::scaled_rnea<S>(model, q, dq, ddq, x(layout.tf()));
    for (int i = 0; i < layout.n; ++i) total += tau(i) * tau(i);
  }
  return total / static_cast<double>(grid.size() * layout.n);
}

}  // namespace

TEST_CASE("gradient of x^2 at 3 is 6") {
  const auto f = [](const VecX<Dual>& x) { return x(0) * x(0); };
  const Eigen::VectorXd g = gradient(f, Eigen::VectorXd::Constant(1, 3.0));
  CHECK(g(0) == 6.0);
}

TEST_CASE("dual arithmetic follows the differentiation rules") {
  const Dual x = Dual::variable(0.7);
  const Dual y{1.9, 0.0};
  CHECK((x * y).d == doctest::Approx(1.9));
  CHECK((x / y).d == doctest::Approx(1.0 / 1.9));
  CHECK((y / x).d == doctest::Approx(-1.9 / (0.7 * 0.7)));
  CHECK(sin(x).d == doctest::Approx(std::cos(0.7)));
  CHECK(cos(x).d == doctest::Approx(-std::sin(0.7)));
  CHECK(exp(log(x)).d == doctest::Approx(1.0));
  CHECK(sqrt(x * x).d == doctest::Approx(1.0));
  CHECK(pow(x, 3.0).d == doctest::Approx(3.0 * 0.49));
  CHECK((-x).d == -1.0);
  CHECK(abs(-x).d == 1.0);
}

TEST_CASE("gradient of the grid torque objective matches central differences at 20 points") {
  std::mt19937_64 rng(20);
  const RobotModel model = reference_two_link();
  const BasisSpec spec = BasisSpec::polynomial(10);
  const DecisionLayout layout{2, 10};
  const GridBasis grid = tabulate(spec, uniform_grid(24));
  const auto f_dual = [&](const VecX<Dual>& x) { return torque_objective<Dual>(model, grid, layout, x); };
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x = testing::uniform(rng, layout.size(), -1.0, 1.0);
    x(layout.tf()) = testing::uniform(rng, 1, 0.5, 5.0)(0);
    const Eigen::VectorXd g = gradient(f_dual, x);
    const double h = 1e-6;
    Eigen::VectorXd fd(layout.size());
    for (int k = 0; k < layout.size(); ++k) {
      Eigen::VectorXd xp = x, xm = x;
      xp(k) += h;
      xm(k) -= h;
      fd(k) = (torque_objective<double>(model, grid, layout, xp) - torque_objective<double>(model, grid, layout, xm)) /
              (2.0 * h);
    }
    CHECK((g - fd).norm() / std::max(1.0, fd.norm()) <= 1e-6);

    // Same gradient through the Jacobian kernel: 2 / (N n) J^T tau.
    const Eigen::MatrixXd tau = torque_grid_serial(model, grid, layout, x);
    const Eigen::MatrixXd jac = torque_jacobian_serial(model, grid, layout, x);
    const Eigen::VectorXd flat = Eigen::Map<const Eigen::VectorXd>(tau.data(), tau.size());
    const Eigen::VectorXd gk = 2.0 / static_cast<double>(flat.size()) * jac.transpose() * flat;
    CHECK((g - gk).norm() <= 1e-9 * std::max(1.0, g.norm()));
  }
}

TEST_CASE("equality-constrained quadratic converges to (1, 1)") {
  const NlpResult res = solve_nlp(circle_problem(), Eigen::Vector2d(2.0, 0.0));
  CHECK(res.status == NlpStatus::improved);
  CHECK(res.x_best(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.x_best(1) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.objective == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("the optimum is a fixed point") {
  const NlpResult res = solve_nlp(circle_problem(), Eigen::Vector2d(1.0, 1.0));
  CHECK(res.status == NlpStatus::no_improvement);
  CHECK(res.x_best == Eigen::Vector2d(1.0, 1.0));
  CHECK(res.stop_reason == "stationary");
}

TEST_CASE("an infeasible start is refused") {
  CHECK_THROWS_AS(solve_nlp(circle_problem(), Eigen::Vector2d(0.0, 0.0)), InfeasibleStart);
  try {
    solve_nlp(disc_problem(), Eigen::Vector2d(1.0, 1.0));
    FAIL("expected InfeasibleStart");
  } catch (const InfeasibleStart& e) {
    CHECK(e.violation == doctest::Approx(1.0));
  }
}

TEST_CASE("curved constraint: iterates stay feasible and the log is monotone") {
  const NlpResult res = solve_nlp(disc_problem(), Eigen::Vector2d(0.0, 0.0));
  CHECK(res.status == NlpStatus::improved);
  CHECK(res.objective == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-4));
  CHECK(res.x_best.squaredNorm() <= 1.0 + 1e-8);
  for (std::size_t k = 1; k < res.log.size(); ++k) {
    CHECK(res.log[k].objective < res.log[k - 1].objective);
    CHECK(res.log[k].max_violation <= 1e-8);
  }
}

TEST_CASE("iteration caps 1, 2 and 5 return feasible improving points") {
  for (int cap : {1, 2, 5}) {
    NlpOptions opt;
    opt.max_iterations = cap;
    const NlpResult res = solve_nlp(disc_problem(), Eigen::Vector2d(0.0, 0.0), opt);
    CHECK(res.iterations <= cap);
    CHECK(max_violation(disc_problem(), res.x_best) <= opt.feasibility_tol);
    CHECK(res.objective <= 0.0);
    CHECK(res.objective == disc_problem().objective(res.x_best));
  }
}

TEST_CASE("variable bounds hold along the iterates") {
  NlpProblem pb = disc_problem();
  pb.var_lower = Eigen::Vector2d(-kInf, -kInf);
  pb.var_upper = Eigen::Vector2d(0.25, kInf);
  const NlpResult res = solve_nlp(pb, Eigen::Vector2d(0.0, 0.0));
  CHECK(res.x_best(0) <= 0.25);
  CHECK(res.x_best(0) == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(res.x_best(1) == doctest::Approx(std::sqrt(1.0 - 0.0625)).epsilon(1e-4));
}

TEST_CASE("refine hook adds a cut and rejects the offending trial") {
  NlpProblem pb;
  pb.num_vars = 1;
  pb.objective = [](const Eigen::VectorXd& x) { return -x(0); };
  pb.objective_gradient = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Constant(1, -1.0); };
  pb.var_lower = Eigen::VectorXd::Constant(1, 0.0);
  pb.var_upper = Eigen::VectorXd::Constant(1, 2.0);
  pb.linear = LinearConstraintSet(1);
  int calls = 0;
  pb.refine = [&calls](const Eigen::VectorXd& x, NlpProblem& p) {
    ++calls;
    if (x(0) <= 0.5 + 1e-12 || !p.linear.rows.empty()) return true;
    p.linear.add(Eigen::VectorXd::Constant(1, 1.0), -kInf, 0.5);
    return false;
  };
  const NlpResult res = solve_nlp(pb, Eigen::VectorXd::Constant(1, 0.0));
  CHECK(res.refinements == 1);
  CHECK(calls >= 2);
  CHECK(res.x_best(0) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("wrong start length is rejected") {
  CHECK_THROWS_AS(solve_nlp(circle_problem(), Eigen::VectorXd::Zero(3)), std::invalid_argument);
}
