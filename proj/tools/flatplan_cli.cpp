#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "flatplan/config.hpp"
#include "flatplan/errors.hpp"
#include "flatplan/report.hpp"

using namespace flatplan;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const nlohmann::json& doc) { write_file(path, doc.dump(2) + "\n"); }

void print_report(const char* name, const ConstraintReport& r) {
  std::printf("  %-5s position %.3e  velocity %.3e  torque %.3e  boundary %.3e  %s\n", name,
              r.position.max_violation, r.velocity.max_violation, r.torque.max_violation, r.boundary_residual,
              r.feasible() ? "feasible" : "VIOLATED");
}

int cmd_plan(const std::string& config_path, const fs::path& out_dir, bool plots, int samples) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  PlanningProblem problem;
  try {
    problem = load_problem_file(config_path);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    if (fs::is_directory(out_dir)) write_json(out_dir / "report.json", config_error_report(e.what()));
    return 2;
  }
  if (ec) {
    std::fprintf(stderr, "cannot create %s: %s\n", out_dir.string().c_str(), ec.message().c_str());
    return 2;
  }

  const PlanResult res = plan(problem);
  write_json(out_dir / "report.json", plan_report(res, problem));
  write_json(out_dir / "coeffs.json", coefficients_json(res, problem));

  std::printf("status: %s\n", to_string(res.status));
  if (!res.message.empty() && res.status != PlanStatus::ok) std::printf("message: %s\n", res.message.c_str());
  const std::pair<const char*, const PlanStage*> stages[] = {{"lp", &res.lp}, {"feas", &res.feas}, {"opt", &res.opt}};
  for (const auto& [name, st] : stages) {
    if (!st->present) continue;
    std::printf("%-5s t_f = %.9f s  (%.3f s)\n", name, st->traj.t_f, st->seconds);
    print_report(name, st->report);
  }
  if (res.nlp_fallback) std::printf("nlp failed; opt repeats feas\n");

  if (res.status == PlanStatus::ok) {
    std::ostringstream csv;
    write_trajectory_csv(csv, res.opt.traj, problem.model, samples);
    write_file(out_dir / "trajectory.csv", csv.str());
  }
  if (plots && res.lp.present) {
    write_file(out_dir / "plot_angle.svg", plot_svg(res, problem, PlotQuantity::angle));
    write_file(out_dir / "plot_velocity.svg", plot_svg(res, problem, PlotQuantity::velocity));
    write_file(out_dir / "plot_torque.svg", plot_svg(res, problem, PlotQuantity::torque));
  }
  std::printf("total %.3f s, artifacts in %s\n", res.seconds, out_dir.string().c_str());
  return exit_code(res.status);
}

int cmd_verify(const std::string& config_path, const std::string& coeffs_path, const std::string& stage,
               int dense) {
  PlanningProblem problem;
  TimeScaledTrajectory traj;
  try {
    problem = load_problem_file(config_path);
    std::ifstream in(coeffs_path);
    if (!in) throw ConfigError("cannot read " + coeffs_path);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(coeffs_path + ": " + e.what());
    }
    traj = load_coefficients(doc, stage);
    if (traj.dof() != problem.model.dof()) throw ConfigError("coefficients do not match the robot's joint count");
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  const int samples = dense > 0 ? dense : problem.solver.dense_samples;
  const ConstraintReport r = constraint_report(traj, problem, samples, problem.solver.report_tol);
  std::printf("t_f %.9f, %d samples, tol %.1e\n", traj.t_f, samples, r.tol);
  const std::pair<const char*, const FamilyViolation*> fams[] = {
      {"position", &r.position}, {"velocity", &r.velocity}, {"torque", &r.torque}};
  bool ok = true;
  for (const auto& [name, f] : fams) {
    const bool bad = f->max_violation > r.tol;
    ok = ok && !bad;
    std::printf("%-9s max %.3e", name, f->max_violation);
    if (bad) std::printf("  VIOLATED: %d samples, worst joint %d at s = %.4f", f->count, f->joint, f->s_at);
    std::printf("\n");
  }
  std::printf("boundary residual %.3e\n", r.boundary_residual);
  std::printf("%s\n", ok ? "feasible" : "infeasible");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flatplan: time-optimal manipulator trajectories from LP, line search and feasible NLP"};
  app.require_subcommand(1);

  std::string config, out_dir, coeffs, stage;
  bool no_plots = false;
  int samples = 1000, dense = 0;

  CLI::App* plan_cmd = app.add_subcommand("plan", "plan a trajectory and write artifacts");
  plan_cmd->add_option("config", config, "problem configuration (JSON)")->required();
  plan_cmd->add_option("-o,--output", out_dir, "output directory")->required();
  plan_cmd->add_flag("--no-plots", no_plots, "skip the SVG plots");
  plan_cmd->add_option("--samples", samples, "rows in trajectory.csv")->check(CLI::Range(2, 10000000));

  CLI::App* verify_cmd = app.add_subcommand("verify", "check stored coefficients against the true bounds");
  verify_cmd->add_option("config", config, "problem configuration (JSON)")->required();
  verify_cmd->add_option("coeffs", coeffs, "coefficient file (coeffs.json)")->required();
  verify_cmd->add_option("--stage", stage, "stage to check: lp, feas or opt (default opt)");
  verify_cmd->add_option("--dense", dense, "sample count (default from the config)")->check(CLI::Range(2, 10000000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    if (*plan_cmd) return cmd_plan(config, out_dir, !no_plots, samples);
    return cmd_verify(config, coeffs, stage, dense);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 5;
  }
}
