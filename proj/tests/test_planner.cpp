#include <doctest.h>

#include <algorithm>
#include <random>

#include "flatplan/config.hpp"
#include "flatplan/errors.hpp"
#include "flatplan/planner.hpp"
#include "test_helpers.hpp"

using namespace flatplan;

namespace {

PlanningProblem two_link() { return load_problem_file(FLATPLAN_CONFIG_DIR "/two_link.json"); }

const PlanResult& two_link_result() {
  static const PlanResult res = plan(two_link());
  return res;
}

// Polynomial coefficients of the constant trajectory q(s) = q.
Eigen::MatrixXd constant_coeffs(const Eigen::VectorXd& q, int m) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(q.size(), m);
  a.col(0) = q;
  return a;
}

}  // namespace

TEST_CASE("premise margins at the worst two-link pose") {
  const RobotModel model = reference_two_link();
  const BasisSpec spec = BasisSpec::polynomial(10);
  const Eigen::Vector2d lb(-19.6, -6.0), ub(19.6, 6.0);
  // q1 = pi/2, q2 = 0: both links horizontal, G = (14.7, 4.9).
  const PremiseCheck pc = check_gravity_premise(constant_coeffs(Eigen::Vector2d(M_PI / 2, 0.0), 10), spec, model,
                                                lb, ub, 240);
  CHECK(pc.holds);
  CHECK(pc.margin(0) == doctest::Approx(19.6 - 14.7).epsilon(1e-12));
  CHECK(pc.margin(1) == doctest::Approx(6.0 - 4.9).epsilon(1e-12));
}

TEST_CASE("premise holds for any two-link pose inside the position bounds") {
  std::mt19937_64 rng(4);
  const RobotModel model = reference_two_link();
  const BasisSpec spec = BasisSpec::polynomial(10);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd a = constant_coeffs(testing::uniform(rng, 2, -M_PI, M_PI), 10);
    const PremiseCheck pc = check_gravity_premise(a, spec, model, Eigen::Vector2d(-19.6, -6.0),
                                                  Eigen::Vector2d(19.6, 6.0), 10);
    CHECK(pc.holds);
    CHECK(pc.margin(0) >= 19.6 - 14.7 - 1e-12);
    CHECK(pc.margin(1) >= 6.0 - 4.9 - 1e-12);
  }
}

TEST_CASE("premise fails on empty torque bounds") {
  const PremiseCheck pc = check_gravity_premise(constant_coeffs(Eigen::Vector2d(0.3, 0.1), 10),
                                                BasisSpec::polynomial(10), reference_two_link(),
                                                Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), 50);
  CHECK_FALSE(pc.holds);
  CHECK(pc.margin.minCoeff() < 0.0);
}

TEST_CASE("premise margin without gravity is the smaller bound magnitude") {
  RobotModel model = reference_two_link();
  model.gravity.setZero();
  const PremiseCheck pc = check_gravity_premise(constant_coeffs(Eigen::Vector2d(1.0, -2.0), 10),
                                                BasisSpec::polynomial(10), model, Eigen::Vector2d(-3.0, -5.0),
                                                Eigen::Vector2d(2.0, 7.0), 30);
  CHECK(pc.holds);
  CHECK(pc.margin(0) == 2.0);
  CHECK(pc.margin(1) == 5.0);
}

TEST_CASE("line search: torque excess decreases with t_f along the trace") {
  const PlanningProblem pb = two_link();
  const PlanResult& res = two_link_result();
  REQUIRE(res.status == PlanStatus::ok);
  const LineSearchResult& ls = res.line_search;
  CHECK(ls.t_f > res.lp.traj.t_f);
  CHECK(ls.t_f == res.feas.traj.t_f);
  CHECK(ls.trace.front().t_f == res.lp.traj.t_f);
  std::vector<LineSearchTrial> trace = ls.trace;
  std::sort(trace.begin(), trace.end(), [](const auto& a, const auto& b) { return a.t_f < b.t_f; });
  for (std::size_t k = 1; k < trace.size(); ++k) {
    CHECK(trace[k].max_violation <= trace[k - 1].max_violation);
    if (trace[k - 1].feasible) CHECK(trace[k].feasible);
  }
  // 1 start, the expansions, then exactly 20 bisections.
  CHECK(static_cast<int>(ls.trace.size()) >= 1 + 1 + pb.solver.bisection_steps);
}

TEST_CASE("line search returns t_f0 when already torque-feasible") {
  const PlanningProblem pb = two_link();
  const PlanResult& res = two_link_result();
  const LineSearchResult ls = line_search_tf(res.feas.traj.coeffs, pb.spec, pb.model, pb.tau_lb_tight(),
                                             pb.tau_ub_tight(), 2.0 * res.feas.traj.t_f, res.grid, pb.solver);
  CHECK(ls.t_f == 2.0 * res.feas.traj.t_f);
  CHECK(ls.trace.size() == 1);
}

TEST_CASE("line search stops at the cap when gravity alone breaks the bounds") {
  const PlanningProblem pb = two_link();
  const PlanResult& res = two_link_result();
  CHECK_THROWS_AS(line_search_tf(res.lp.traj.coeffs, pb.spec, pb.model, Eigen::Vector2d(-1.0, -1.0),
                                 Eigen::Vector2d(1.0, 1.0), res.lp.traj.t_f, res.grid, pb.solver),
                  PlanError);
}

TEST_CASE("two-link plan: staged behavior and invariants") {
  const PlanResult& res = two_link_result();
  REQUIRE(res.status == PlanStatus::ok);
  REQUIRE(res.lp.present);
  REQUIRE(res.feas.present);
  REQUIRE(res.opt.present);
  CHECK(res.lp.report.dense_samples == 1000);
  CHECK(res.lp.report.state_feasible());
  CHECK_FALSE(res.lp.report.torque_feasible());
  CHECK(res.feas.report.feasible());
  CHECK(res.opt.report.feasible());
  CHECK((res.feas.traj.coeffs.array() == res.lp.traj.coeffs.array()).all());
  CHECK(res.lp.traj.t_f <= res.opt.traj.t_f);
  CHECK(res.opt.traj.t_f < res.feas.traj.t_f);
  CHECK(res.premise.holds);
  CHECK_FALSE(res.nlp_fallback);
  CHECK(res.nlp.status == NlpStatus::improved);
  CHECK(res.seconds < 60.0);
}

TEST_CASE("two-link plan is deterministic") {
  const PlanResult again = plan(two_link());
  const PlanResult& res = two_link_result();
  CHECK(again.status == res.status);
  CHECK(again.lp.traj.t_f == res.lp.traj.t_f);
  CHECK(again.feas.traj.t_f == res.feas.traj.t_f);
  CHECK(again.opt.traj.t_f == res.opt.traj.t_f);
  CHECK((again.opt.traj.coeffs.array() == res.opt.traj.coeffs.array()).all());
  CHECK((again.grid.array() == res.grid.array()).all());
}

TEST_CASE("q0 = qf collapses to t_min and the constant trajectory") {
  PlanningProblem pb = two_link();
  pb.bc.q0 = pb.bc.qf = Eigen::Vector2d(0.4, -0.2);
  const PlanResult res = plan(pb);
  REQUIRE(res.status == PlanStatus::ok);
  CHECK(res.lp.traj.t_f == doctest::Approx(pb.solver.t_min).epsilon(1e-12));
  for (const PlanStage* st : {&res.lp, &res.feas, &res.opt}) {
    CHECK(st->report.feasible());
    for (double s : {0.0, 0.3, 0.77, 1.0}) {
      CHECK((st->traj.coeffs * eval_basis(pb.spec, s, 0) - pb.bc.q0).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("torque bounds below gravity fail the premise before the NLP") {
  PlanningProblem pb = two_link();
  pb.limits.tau_lb = Eigen::Vector2d(-0.1, -0.1);
  pb.limits.tau_ub = Eigen::Vector2d(0.1, 0.1);
  const PlanResult res = plan(pb);
  CHECK(res.status == PlanStatus::premise_violated);
  CHECK(res.message.find("premise") != std::string::npos);
  CHECK(res.lp.present);
  CHECK_FALSE(res.feas.present);
  CHECK(res.nlp.iterations == 0);
  CHECK(res.premise.margin.minCoeff() < 0.0);
}

TEST_CASE("zero velocity window on a moving joint is state-infeasible") {
  PlanningProblem pb = two_link();
  pb.limits.qd_lb(1) = pb.limits.qd_ub(1) = 0.0;
  const PlanResult res = plan(pb);
  CHECK(res.status == PlanStatus::state_infeasible);
  CHECK(res.lp_solution.phase_one_objective > 0.0);
}

TEST_CASE("fixed-time effort mode keeps t_f and improves the effort") {
  PlanningProblem pb = two_link();
  pb.cost = {CostType::fixed_time_effort, 4.0};
  const PlanResult res = plan(pb);
  REQUIRE(res.status == PlanStatus::ok);
  CHECK(res.lp.traj.t_f == 4.0);
  CHECK(res.feas.traj.t_f == 4.0);
  CHECK(res.opt.traj.t_f == 4.0);
  CHECK(res.feas.report.feasible());
  CHECK(res.opt.report.feasible());
  REQUIRE(!res.nlp.log.empty());
  CHECK(res.nlp.objective <= res.nlp.log.front().objective);
}

TEST_CASE("fixed t_f too short for the torques is reported as a premise failure") {
  PlanningProblem pb = two_link();
  pb.cost = {CostType::fixed_time_effort, 2.3};
  const PlanResult res = plan(pb);
  CHECK(res.status == PlanStatus::premise_violated);
}

TEST_CASE("constant trajectory inside the bounds reports nothing") {
  const PlanningProblem pb = two_link();
  PlanningProblem still = pb;
  still.bc.q0 = still.bc.qf = Eigen::Vector2d(1.0, 0.5);
  const TimeScaledTrajectory traj{constant_coeffs(Eigen::Vector2d(1.0, 0.5), 10), pb.spec, 3.0};
  const ConstraintReport rep = constraint_report(traj, still, 1000);
  CHECK(rep.feasible());
  CHECK(rep.position.count == 0);
  CHECK(rep.torque.count == 0);
  CHECK(rep.boundary_residual == 0.0);
}

TEST_CASE("validation rejects malformed problems") {
  PlanningProblem pb = two_link();
  pb.limits.q_lb(0) = 4.0;
  CHECK_THROWS_AS(pb.validate(), ConfigError);
  pb = two_link();
  pb.bc.qd0(0) = 0.1;
  CHECK_THROWS_AS(pb.validate(), ConfigError);
  pb = two_link();
  pb.solver.mode = ConstraintMode::hull;
  CHECK_THROWS_AS(pb.validate(), ConfigError);
  pb = two_link();
  pb.solver.torque_margin = 0.5;
  CHECK_THROWS_AS(pb.validate(), ConfigError);
  pb = two_link();
  pb.spec = BasisSpec::bspline(2, 8);
  CHECK_THROWS_AS(pb.validate(), ConfigError);
}

TEST_CASE("six-dof hull plan is fully feasible") {
  const PlanningProblem pb = load_problem_file(FLATPLAN_CONFIG_DIR "/six_dof_generic.json");
  CHECK(pb.spec.k == 9);
  CHECK(pb.spec.m == 24);
  const PlanResult res = plan(pb);
  REQUIRE(res.status == PlanStatus::ok);
  CHECK(res.lp.report.state_feasible());
  CHECK(res.feas.report.feasible());
  CHECK(res.opt.report.feasible());
  CHECK(res.lp.traj.t_f <= res.opt.traj.t_f);
  CHECK(res.opt.traj.t_f <= res.feas.traj.t_f);
}
