#include <doctest.h>

#include <random>

#include "flatplan/errors.hpp"
#include "flatplan/trajectory.hpp"
#include "test_helpers.hpp"

using namespace flatplan;

TEST_CASE("smoothstep trajectory hand values") {
  TimeScaledTrajectory traj{(Eigen::MatrixXd(1, 4) << 0, 0, 3, -2).finished(), BasisSpec::polynomial(4), 2.0};
  const JointState st = eval_state(traj, 1.0);
  CHECK(st.q(0) == doctest::Approx(0.5));
  CHECK(st.qd(0) == doctest::Approx(0.75));
  CHECK(st.qdd(0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(eval_state(traj, 2.5), DomainError);
  CHECK_THROWS_AS(eval_state(traj, -0.1), DomainError);
}

TEST_CASE("clamped B-spline starts at the first column") {
  std::mt19937_64 rng(4);
  TimeScaledTrajectory traj{Eigen::MatrixXd(testing::uniform(rng, 18, -1, 1).reshaped(3, 6)),
                            BasisSpec::bspline(4, 6), 1.7};
  CHECK((eval_state(traj, 0.0).q - traj.coeffs.col(0)).norm() < 1e-15);
  CHECK((eval_state(traj, traj.t_f).q - traj.coeffs.col(5)).norm() < 1e-15);
}

TEST_CASE("doubling t_f halves velocity and quarters acceleration") {
  std::mt19937_64 rng(5);
  TimeScaledTrajectory a{Eigen::MatrixXd(testing::uniform(rng, 20, -1, 1).reshaped(2, 10)),
                         BasisSpec::polynomial(10), 1.3};
  TimeScaledTrajectory b = a;
  b.t_f = 2.6;
  const JointState sa = eval_state(a, 0.4 * a.t_f);
  const JointState sb = eval_state(b, 0.4 * b.t_f);
  CHECK((sb.q - sa.q).norm() < 1e-15);
  CHECK((sb.qd - 0.5 * sa.qd).norm() < 1e-14);
  CHECK((sb.qdd - 0.25 * sa.qdd).norm() < 1e-13);
}

TEST_CASE("eval_state derivatives match finite differences in time") {
  std::mt19937_64 rng(6);
  TimeScaledTrajectory traj{Eigen::MatrixXd(testing::uniform(rng, 14, -1, 1).reshaped(2, 7)),
                            BasisSpec::bspline(5, 7), 2.3};
  const double h = 1e-5;
  for (double t : {0.1, 0.7, 1.2, 2.0}) {
    const Eigen::VectorXd fd = (eval_state(traj, t + h).q - eval_state(traj, t - h).q) / (2 * h);
    const Eigen::VectorXd fdd = (eval_state(traj, t + h).qd - eval_state(traj, t - h).qd) / (2 * h);
    CHECK((fd - eval_state(traj, t).qd).cwiseAbs().maxCoeff() < 1e-5);
    CHECK((fdd - eval_state(traj, t).qdd).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("boundary rows for rest-to-rest motion do not involve t_f") {
  const BasisSpec spec = BasisSpec::polynomial(6);
  BoundaryConditions bc{Eigen::Vector2d(0, 0), Eigen::Vector2d::Zero(), Eigen::Vector2d(1, -1), Eigen::Vector2d::Zero()};
  const auto rows = boundary_constraint_rows(spec, bc);
  REQUIRE(rows.rows.size() == 8);
  const DecisionLayout layout{2, 6};
  for (const auto& row : rows.rows) {
    CHECK(row.is_equality());
    CHECK(row.coeffs(layout.tf()) == 0.0);
  }
}

TEST_CASE("clamped B-spline position rows pin the end columns") {
  const BasisSpec spec = BasisSpec::bspline(4, 8);
  BoundaryConditions bc{Eigen::Vector2d(0.1, 0.2), Eigen::Vector2d::Zero(), Eigen::Vector2d(1, -1), Eigen::Vector2d::Zero()};
  const auto rows = boundary_constraint_rows(spec, bc);
  const DecisionLayout layout{2, 8};
  CHECK(rows.rows[0].coeffs == Eigen::VectorXd::Unit(layout.size(), layout.a(0, 0)));
  CHECK(rows.rows[1].coeffs == Eigen::VectorXd::Unit(layout.size(), layout.a(0, 7)));
}

TEST_CASE("nonzero initial velocity couples A and t_f") {
  const BasisSpec spec = BasisSpec::polynomial(5);
  BoundaryConditions bc{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 0.7), Eigen::VectorXd::Ones(1),
                        Eigen::VectorXd::Zero(1)};
  const auto rows = boundary_constraint_rows(spec, bc);
  const DecisionLayout layout{1, 5};
  CHECK(rows.rows[2].coeffs(layout.tf()) == -0.7);
  CHECK(rows.rows[2].coeffs(layout.a(0, 1)) == 1.0);
}

TEST_CASE("any solution of the boundary rows reproduces the boundary state") {
  std::mt19937_64 rng(12);
  const BasisSpec spec = BasisSpec::polynomial(8);
  BoundaryConditions bc{testing::uniform(rng, 3, -1, 1), testing::uniform(rng, 3, -1, 1), testing::uniform(rng, 3, -1, 1),
                        testing::uniform(rng, 3, -1, 1)};
  const auto rows = boundary_constraint_rows(spec, bc);
  const DecisionLayout layout{3, 8};
  // Minimum-norm solution of the equality system with t_f fixed to 1.7.
  Eigen::MatrixXd e(rows.rows.size(), layout.size() - 1);
  Eigen::VectorXd rhs(rows.rows.size());
  for (std::size_t r = 0; r < rows.rows.size(); ++r) {
    e.row(r) = rows.rows[r].coeffs.head(layout.size() - 1).transpose();
    rhs(r) = rows.rows[r].lower - rows.rows[r].coeffs(layout.tf()) * 1.7;
  }
  Eigen::VectorXd x(layout.size());
  x.head(layout.size() - 1) = e.completeOrthogonalDecomposition().solve(rhs);
  x(layout.tf()) = 1.7;
  CHECK(rows.max_violation(x) < 1e-10);
  TimeScaledTrajectory traj{layout.coefficients(x), spec, 1.7};
  CHECK((eval_state(traj, 0).q - bc.q0).norm() < 1e-10);
  CHECK((eval_state(traj, 0).qd - bc.qd0).norm() < 1e-10);
  CHECK((eval_state(traj, 1.7).q - bc.qf).norm() < 1e-10);
  CHECK((eval_state(traj, 1.7).qd - bc.qdf).norm() < 1e-10);
}
