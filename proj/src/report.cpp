#include "flatplan/report.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "flatplan/config.hpp"
#include "flatplan/errors.hpp"

namespace flatplan {

namespace {

using nlohmann::json;

json to_array(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_rows(const Eigen::MatrixXd& a) {
  json out = json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) out.push_back(to_array(a.row(r).transpose()));
  return out;
}

json family(const FamilyViolation& f) {
  return {{"max_violation", f.max_violation}, {"s_at", f.s_at}, {"joint", f.joint}, {"count", f.count}};
}

json stage_json(const PlanStage& st) {
  if (!st.present) {
    return {{"present", false}, {"t_f", nullptr}, {"seconds", nullptr}, {"report", nullptr}};
  }
  return {{"present", true}, {"t_f", st.traj.t_f}, {"seconds", st.seconds}, {"report", report_to_json(st.report)}};
}

const char* error_code(PlanStatus status) {
  switch (status) {
    case PlanStatus::state_infeasible:
      return "state_infeasible";
    case PlanStatus::premise_violated:
      return "premise_violated";
    default:
      return "solver_failure";
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

int exit_code(PlanStatus status) {
  switch (status) {
    case PlanStatus::ok:
      return 0;
    case PlanStatus::state_infeasible:
      return 3;
    case PlanStatus::premise_violated:
      return 4;
    case PlanStatus::solver_failure:
      return 5;
  }
  return 5;
}

std::string run_id(const json& config) {
  // FNV-1a over the canonical dump.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const TimeScaledTrajectory& traj, const RobotModel& model, int samples) {
  if (samples < 2) throw ConfigError("trajectory table needs at least 2 samples");
  const int n = traj.dof();
  os << "t";
  for (const char* name : {"q", "qd", "qdd", "tau"}) {
    for (int i = 1; i <= n; ++i) os << ',' << name << '_' << i;
  }
  os << '\n';
  for (int k = 0; k < samples; ++k) {
    // Endpoints exact so the table hits t = 0 and t = t_f.
    const double t = k + 1 == samples ? traj.t_f : traj.t_f * k / (samples - 1);
    const JointState st = eval_state(traj, t);
    const Eigen::VectorXd tau = inverse_dynamics(model, st);
    os << fmt(t);
    for (const Eigen::VectorXd* v : {&st.q, &st.qd, &st.qdd, &tau}) {
      for (int i = 0; i < n; ++i) os << ',' << fmt((*v)(i));
    }
    os << '\n';
  }
}

json report_to_json(const ConstraintReport& r) {
  return {{"dense_samples", r.dense_samples},
          {"tol", r.tol},
          {"position", family(r.position)},
          {"velocity", family(r.velocity)},
          {"torque", family(r.torque)},
          {"boundary_residual", r.boundary_residual},
          {"state_feasible", r.state_feasible()},
          {"torque_feasible", r.torque_feasible()},
          {"feasible", r.feasible()}};
}

json plan_report(const PlanResult& res, const PlanningProblem& problem) {
  const json config = problem_to_json(problem);
  json trace = json::array();
  for (const LineSearchTrial& t : res.line_search.trace) {
    trace.push_back({{"t_f", t.t_f}, {"max_violation", t.max_violation}, {"feasible", t.feasible}});
  }
  json log = json::array();
  for (const NlpIterate& it : res.nlp.log) {
    log.push_back({{"iteration", it.iteration},
                   {"objective", it.objective},
                   {"max_violation", it.max_violation},
                   {"step_norm", it.step_norm}});
  }
  json doc;
  doc["run_id"] = run_id(config);
  doc["status"] = to_string(res.status);
  doc["message"] = res.message;
  doc["stages"] = {{"lp", stage_json(res.lp)}, {"feas", stage_json(res.feas)}, {"opt", stage_json(res.opt)}};
  doc["lp"] = {{"status", to_string(res.lp_solution.status)},
               {"iterations", res.lp_solution.iterations},
               {"objective", res.lp_solution.objective},
               {"phase_one_objective", res.lp_solution.phase_one_objective},
               {"max_violation", res.lp_solution.max_violation}};
  doc["premise"] = {{"holds", res.premise.holds}, {"margin", to_array(res.premise.margin)}};
  doc["line_search"] = {{"t_f", res.line_search.t_f}, {"trace", trace}};
  doc["nlp"] = {{"status", to_string(res.nlp.status)},
                {"iterations", res.nlp.iterations},
                {"refinements", res.nlp.refinements},
                {"stop_reason", res.nlp.stop_reason},
                {"fallback", res.nlp_fallback},
                {"log", log}};
  doc["grid"] = {{"points", res.grid.size()}, {"exchange_rounds", res.exchange_rounds}};
  doc["timings"] = {{"lp", res.lp.seconds},
                    {"feas", res.feas.seconds},
                    {"opt", res.opt.seconds},
                    {"total", res.seconds}};
  doc["config"] = config;
  if (res.status == PlanStatus::ok) {
    doc["error"] = nullptr;
  } else {
    doc["error"] = {{"code", error_code(res.status)}, {"exit_code", exit_code(res.status)}, {"message", res.message}};
    if (res.status == PlanStatus::state_infeasible) {
      doc["error"]["certificate"] = {{"phase_one_objective", res.lp_solution.phase_one_objective}};
    } else if (res.status == PlanStatus::premise_violated) {
      doc["error"]["margins"] = to_array(res.premise.margin);
    }
  }
  return doc;
}

json config_error_report(const std::string& message) {
  return {{"run_id", nullptr},
          {"status", "config_error"},
          {"message", message},
          {"error", {{"code", "config_error"}, {"exit_code", 2}, {"message", message}}}};
}

json coefficients_json(const PlanResult& res, const PlanningProblem& problem) {
  json stages = json::object();
  const std::pair<const char*, const PlanStage*> named[] = {{"lp", &res.lp}, {"feas", &res.feas}, {"opt", &res.opt}};
  for (const auto& [name, st] : named) {
    if (st->present) stages[name] = {{"t_f", st->traj.t_f}, {"A", matrix_rows(st->traj.coeffs)}};
  }
  return {{"run_id", run_id(problem_to_json(problem))}, {"basis", basis_to_json(problem.spec)}, {"stages", stages}};
}

TimeScaledTrajectory load_coefficients(const json& doc, const std::string& stage) {
  if (!doc.is_object() || !doc.contains("basis")) throw ConfigError("coefficients: missing basis");
  TimeScaledTrajectory traj;
  traj.spec = load_basis(doc.at("basis"));
  const json* node = &doc;
  if (doc.contains("stages")) {
    const json& stages = doc.at("stages");
    if (!stages.is_object() || stages.empty()) throw ConfigError("coefficients: no stages");
    std::string name = stage;
    if (name.empty()) name = stages.contains("opt") ? "opt" : (stages.contains("feas") ? "feas" : "lp");
    if (!stages.contains(name)) throw ConfigError("coefficients: no stage " + name);
    node = &stages.at(name);
  }
  if (!node->contains("t_f") || !node->at("t_f").is_number()) throw ConfigError("coefficients: missing t_f");
  traj.t_f = node->at("t_f").get<double>();
  if (!(traj.t_f > 0.0) || !std::isfinite(traj.t_f)) throw ConfigError("coefficients: t_f must be positive");
  if (!node->contains("A") || !node->at("A").is_array() || node->at("A").empty()) {
    throw ConfigError("coefficients: missing A");
  }
  const json& rows = node->at("A");
  traj.coeffs.resize(static_cast<Eigen::Index>(rows.size()), traj.spec.m);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != static_cast<std::size_t>(traj.spec.m)) {
      throw ConfigError("coefficients: row " + std::to_string(i) + " of A must have m entries");
    }
    for (int j = 0; j < traj.spec.m; ++j) {
      if (!rows[i][j].is_number()) throw ConfigError("coefficients: non-numeric entry in A");
      traj.coeffs(static_cast<Eigen::Index>(i), j) = rows[i][j].get<double>();
    }
  }
  return traj;
}

std::string plot_svg(const PlanResult& res, const PlanningProblem& problem, PlotQuantity quantity, int samples) {
  const int n = problem.model.dof();
  const double width = 760, panel = 180, left = 70, right = 130, top = 40, gap = 40;
  const double plot_w = width - left - right;
  const double height = top + n * (panel + gap);
  struct Series {
    const char* name;
    const char* color;
    const PlanStage* stage;
  };
  const Series series[] = {{"LP", "#d62728", &res.lp}, {"feas", "#1f77b4", &res.feas}, {"opt", "#2ca02c", &res.opt}};

  const char* title = quantity == PlotQuantity::angle      ? "joint angle q [rad]"
                      : quantity == PlotQuantity::velocity ? "joint velocity qd [rad/s]"
                                                           : "joint torque tau [N m]";
  const Eigen::VectorXd& lb = quantity == PlotQuantity::angle      ? problem.limits.q_lb
                              : quantity == PlotQuantity::velocity ? problem.limits.qd_lb
                                                                   : problem.limits.tau_lb;
  const Eigen::VectorXd& ub = quantity == PlotQuantity::angle      ? problem.limits.q_ub
                              : quantity == PlotQuantity::velocity ? problem.limits.qd_ub
                                                                   : problem.limits.tau_ub;

  // Sample every present stage once.
  double t_max = 0.0;
  std::vector<std::vector<std::pair<double, Eigen::VectorXd>>> curves;
  for (const Series& s : series) {
    curves.emplace_back();
    if (!s.stage->present) continue;
    const TimeScaledTrajectory& traj = s.stage->traj;
    t_max = std::max(t_max, traj.t_f);
    for (int k = 0; k < samples; ++k) {
      const double t = traj.t_f * k / (samples - 1);
      const JointState st = eval_state(traj, t);
      Eigen::VectorXd v = quantity == PlotQuantity::angle      ? st.q
                          : quantity == PlotQuantity::velocity ? st.qd
                                                               : inverse_dynamics(problem.model, st);
      curves.back().push_back({t, v});
    }
  }
  if (t_max <= 0.0) t_max = 1.0;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left << "\" y=\"22\" font-size=\"15\">" << title << "</text>\n";
  for (int i = 0; i < n; ++i) {
    double lo = lb(i), hi = ub(i);
    for (const auto& c : curves) {
      for (const auto& [t, v] : c) {
        if (std::isfinite(v(i))) {
          lo = std::min(lo, v(i));
          hi = std::max(hi, v(i));
        }
      }
    }
    const double pad = 0.05 * std::max(hi - lo, 1e-9);
    lo -= pad;
    hi += pad;
    const double y0 = top + i * (panel + gap);
    const auto px = [&](double t) { return left + plot_w * t / t_max; };
    const auto py = [&](double v) { return y0 + panel * (hi - v) / (hi - lo); };

    os << "<rect x=\"" << left << "\" y=\"" << y0 << "\" width=\"" << plot_w << "\" height=\"" << panel
       << "\" fill=\"none\" stroke=\"#444\"/>\n";
    os << "<text x=\"8\" y=\"" << y0 + panel / 2 << "\">joint " << i + 1 << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << py(hi - pad) + 4 << "\" text-anchor=\"end\">" << num(hi - pad)
       << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << py(lo + pad) + 4 << "\" text-anchor=\"end\">" << num(lo + pad)
       << "</text>\n";
    os << "<text x=\"" << left + plot_w << "\" y=\"" << y0 + panel + 16 << "\" text-anchor=\"end\">t = "
       << num(t_max) << " s</text>\n";
    for (double b : {lb(i), ub(i)}) {
      os << "<line x1=\"" << left << "\" y1=\"" << py(b) << "\" x2=\"" << left + plot_w << "\" y2=\"" << py(b)
         << "\" stroke=\"#777\" stroke-dasharray=\"5,4\"/>\n";
    }
    for (std::size_t k = 0; k < curves.size(); ++k) {
      if (curves[k].empty()) continue;
      os << "<polyline fill=\"none\" stroke=\"" << series[k].color << "\" stroke-width=\"1.5\" points=\"";
      for (const auto& [t, v] : curves[k]) os << px(t) << ',' << py(v(i)) << ' ';
      os << "\"/>\n";
    }
  }
  // Legend.
  double ly = top;
  for (const Series& s : series) {
    if (!s.stage->present) continue;
    os << "<line x1=\"" << width - right + 15 << "\" y1=\"" << ly << "\" x2=\"" << width - right + 40 << "\" y2=\""
       << ly << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << width - right + 46 << "\" y=\"" << ly + 4 << "\">" << s.name << " (t_f "
       << num(s.stage->traj.t_f) << ")</text>\n";
    ly += 18;
  }
  os << "<line x1=\"" << width - right + 15 << "\" y1=\"" << ly << "\" x2=\"" << width - right + 40 << "\" y2=\""
     << ly << "\" stroke=\"#777\" stroke-dasharray=\"5,4\"/>\n";
  os << "<text x=\"" << width - right + 46 << "\" y=\"" << ly + 4 << "\">bounds</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace flatplan
