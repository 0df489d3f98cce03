#include "flatplan/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "flatplan/errors.hpp"

namespace flatplan {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError("missing field " + path + "." + key);
  return obj.at(key);
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError("unknown field " + path + "." + it.key());
  }
}

double read_number(const json& node, const std::string& path) {
  if (!node.is_number()) throw ConfigError("expected number at " + path);
  const double v = node.get<double>();
  if (!std::isfinite(v)) throw ConfigError("non-finite value at " + path);
  return v;
}

int read_int(const json& node, const std::string& path) {
  if (!node.is_number_integer()) throw ConfigError("expected integer at " + path);
  return node.get<int>();
}

Eigen::VectorXd read_array(const json& node, const std::string& path, int n) {
  if (!node.is_array()) throw ConfigError("expected array at " + path);
  if (n >= 0 && node.size() != static_cast<std::size_t>(n)) {
    throw ConfigError(path + " must have " + std::to_string(n) + " entries, got " + std::to_string(node.size()));
  }
  Eigen::VectorXd v(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) v(i) = read_number(node[i], path + "[" + std::to_string(i) + "]");
  return v;
}

json to_array(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

void load_solver(const json& node, SolverSettings& s) {
  if (!node.is_object()) throw ConfigError("solver must be an object");
  reject_unknown(node,
                 {"N", "mode", "torque_margin", "t_min", "line_search_factor", "bisection_steps", "tf_cap_factor",
                  "premise_density", "dense_samples", "report_tol", "scan_factor", "exchange_rounds",
                  "max_exchange_points", "nlp_max_iterations", "nlp_feasibility_tol", "nlp_step_tol",
                  "nlp_stationarity_tol", "nlp_initial_radius", "lp_max_iterations", "lp_feasibility_tol"},
                 "solver");
  const auto num = [&](const char* key, double& out) {
    if (node.contains(key)) out = read_number(node.at(key), std::string("solver.") + key);
  };
  const auto integer = [&](const char* key, int& out) {
    if (node.contains(key)) out = read_int(node.at(key), std::string("solver.") + key);
  };
  integer("N", s.samples);
  if (node.contains("mode")) {
    const json& m = node.at("mode");
    if (m == "sampled") {
      s.mode = ConstraintMode::sampled;
    } else if (m == "hull") {
      s.mode = ConstraintMode::hull;
    } else {
      throw ConfigError("solver.mode must be \"sampled\" or \"hull\"");
    }
  }
  num("torque_margin", s.torque_margin);
  num("t_min", s.t_min);
  num("line_search_factor", s.line_search_factor);
  integer("bisection_steps", s.bisection_steps);
  num("tf_cap_factor", s.tf_cap_factor);
  integer("premise_density", s.premise_density);
  integer("dense_samples", s.dense_samples);
  num("report_tol", s.report_tol);
  integer("scan_factor", s.scan_factor);
  integer("exchange_rounds", s.exchange_rounds);
  integer("max_exchange_points", s.max_exchange_points);
  integer("nlp_max_iterations", s.nlp.max_iterations);
  num("nlp_feasibility_tol", s.nlp.feasibility_tol);
  num("nlp_step_tol", s.nlp.step_tol);
  num("nlp_stationarity_tol", s.nlp.stationarity_tol);
  num("nlp_initial_radius", s.nlp.initial_radius);
  integer("lp_max_iterations", s.lp.max_iterations);
  num("lp_feasibility_tol", s.lp.feasibility_tol);

  if (s.samples < 2) throw ConfigError("solver.N must be at least 2");
  if (!(s.line_search_factor > 1.0)) throw ConfigError("solver.line_search_factor must exceed 1");
  if (s.bisection_steps < 0) throw ConfigError("solver.bisection_steps must be non-negative");
  if (!(s.tf_cap_factor > 1.0)) throw ConfigError("solver.tf_cap_factor must exceed 1");
  if (s.premise_density < 1) throw ConfigError("solver.premise_density must be positive");
  if (s.dense_samples < 2) throw ConfigError("solver.dense_samples must be at least 2");
  if (!(s.report_tol >= 0.0)) throw ConfigError("solver.report_tol must be non-negative");
  if (s.scan_factor < 1) throw ConfigError("solver.scan_factor must be positive");
  if (s.exchange_rounds < 0 || s.max_exchange_points < 0) throw ConfigError("solver exchange limits must be non-negative");
  if (s.nlp.max_iterations < 0 || s.lp.max_iterations < 1) throw ConfigError("solver iteration caps out of range");
  if (!(s.nlp.feasibility_tol > 0.0) || !(s.nlp.step_tol > 0.0) || !(s.nlp.stationarity_tol >= 0.0) ||
      !(s.nlp.initial_radius > 0.0) || !(s.lp.feasibility_tol > 0.0)) {
    throw ConfigError("solver tolerances must be positive");
  }
}

json solver_to_json(const SolverSettings& s) {
  return {{"N", s.samples},
          {"mode", s.mode == ConstraintMode::hull ? "hull" : "sampled"},
          {"torque_margin", s.torque_margin},
          {"t_min", s.t_min},
          {"line_search_factor", s.line_search_factor},
          {"bisection_steps", s.bisection_steps},
          {"tf_cap_factor", s.tf_cap_factor},
          {"premise_density", s.premise_density},
          {"dense_samples", s.dense_samples},
          {"report_tol", s.report_tol},
          {"scan_factor", s.scan_factor},
          {"exchange_rounds", s.exchange_rounds},
          {"max_exchange_points", s.max_exchange_points},
          {"nlp_max_iterations", s.nlp.max_iterations},
          {"nlp_feasibility_tol", s.nlp.feasibility_tol},
          {"nlp_step_tol", s.nlp.step_tol},
          {"nlp_stationarity_tol", s.nlp.stationarity_tol},
          {"nlp_initial_radius", s.nlp.initial_radius},
          {"lp_max_iterations", s.lp.max_iterations},
          {"lp_feasibility_tol", s.lp.feasibility_tol}};
}

}  // namespace

BasisSpec load_basis(const json& node) {
  if (!node.is_object()) throw ConfigError("basis must be an object");
  reject_unknown(node, {"type", "m", "k", "order", "knots"}, "basis");
  const json& type = require(node, "type", "basis");
  const int m = read_int(require(node, "m", "basis"), "basis.m");
  BasisSpec spec;
  if (type == "polynomial") {
    spec = BasisSpec::polynomial(m);
  } else if (type == "bspline") {
    const char* key = node.contains("k") ? "k" : "order";
    const int k = read_int(require(node, key, "basis"), std::string("basis.") + key);
    Eigen::VectorXd knots;
    if (node.contains("knots")) knots = read_array(node.at("knots"), "basis.knots", -1);
    spec = BasisSpec::bspline(k, m, knots);
  } else {
    throw ConfigError("basis.type must be \"polynomial\" or \"bspline\"");
  }
  spec.validate();
  return spec;
}

json basis_to_json(const BasisSpec& spec) {
  if (spec.family == BasisFamily::polynomial) return {{"type", "polynomial"}, {"m", spec.m}};
  return {{"type", "bspline"}, {"m", spec.m}, {"k", spec.k}, {"knots", to_array(spec.knots)}};
}

PlanningProblem load_problem(const json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  reject_unknown(doc, {"robot", "limits", "boundary", "basis", "solver", "cost", "description"}, "config");
  PlanningProblem pb;
  pb.model = load_robot(require(doc, "robot", "config"));
  const int n = pb.model.dof();

  const json& lim = require(doc, "limits", "config");
  reject_unknown(lim, {"q_min", "q_max", "qd_min", "qd_max", "tau_min", "tau_max"}, "limits");
  pb.limits.q_lb = read_array(require(lim, "q_min", "limits"), "limits.q_min", n);
  pb.limits.q_ub = read_array(require(lim, "q_max", "limits"), "limits.q_max", n);
  pb.limits.qd_lb = read_array(require(lim, "qd_min", "limits"), "limits.qd_min", n);
  pb.limits.qd_ub = read_array(require(lim, "qd_max", "limits"), "limits.qd_max", n);
  pb.limits.tau_lb = read_array(require(lim, "tau_min", "limits"), "limits.tau_min", n);
  pb.limits.tau_ub = read_array(require(lim, "tau_max", "limits"), "limits.tau_max", n);

  const json& bnd = require(doc, "boundary", "config");
  reject_unknown(bnd, {"q0", "qd0", "qf", "qdf"}, "boundary");
  pb.bc.q0 = read_array(require(bnd, "q0", "boundary"), "boundary.q0", n);
  pb.bc.qf = read_array(require(bnd, "qf", "boundary"), "boundary.qf", n);
  pb.bc.qd0 = bnd.contains("qd0") ? read_array(bnd.at("qd0"), "boundary.qd0", n) : Eigen::VectorXd::Zero(n);
  pb.bc.qdf = bnd.contains("qdf") ? read_array(bnd.at("qdf"), "boundary.qdf", n) : Eigen::VectorXd::Zero(n);

  pb.spec = load_basis(require(doc, "basis", "config"));
  if (doc.contains("solver")) load_solver(doc.at("solver"), pb.solver);

  if (doc.contains("cost")) {
    const json& cost = doc.at("cost");
    reject_unknown(cost, {"type", "t_f"}, "cost");
    const json& type = require(cost, "type", "cost");
    if (type == "time") {
      pb.cost.type = CostType::time;
    } else if (type == "fixed_time_effort") {
      pb.cost.type = CostType::fixed_time_effort;
      pb.cost.t_f = read_number(require(cost, "t_f", "cost"), "cost.t_f");
    } else {
      throw ConfigError("cost.type must be \"time\" or \"fixed_time_effort\"");
    }
  }
  pb.validate();
  return pb;
}

PlanningProblem load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return load_problem(doc);
}

json problem_to_json(const PlanningProblem& pb) {
  json doc;
  doc["robot"] = serialize_robot(pb.model);
  doc["limits"] = {{"q_min", to_array(pb.limits.q_lb)},     {"q_max", to_array(pb.limits.q_ub)},
                   {"qd_min", to_array(pb.limits.qd_lb)},   {"qd_max", to_array(pb.limits.qd_ub)},
                   {"tau_min", to_array(pb.limits.tau_lb)}, {"tau_max", to_array(pb.limits.tau_ub)}};
  doc["boundary"] = {{"q0", to_array(pb.bc.q0)},
                     {"qd0", to_array(pb.bc.qd0)},
                     {"qf", to_array(pb.bc.qf)},
                     {"qdf", to_array(pb.bc.qdf)}};
  doc["basis"] = basis_to_json(pb.spec);
  doc["solver"] = solver_to_json(pb.solver);
  if (pb.cost.type == CostType::time) {
    doc["cost"] = {{"type", "time"}};
  } else {
    doc["cost"] = {{"type", "fixed_time_effort"}, {"t_f", pb.cost.t_f}};
  }
  return doc;
}

}  // namespace flatplan
