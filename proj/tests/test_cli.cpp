#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "flatplan/config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string output;
};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("flatplan_cli_" + std::to_string(getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Run run(const std::string& args) {
  const fs::path log = scratch("log") / "out.txt";
  const std::string cmd = std::string(FLATPLAN_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

json two_link_doc() { return json::parse(slurp(FLATPLAN_CONFIG_DIR "/two_link.json")); }

fs::path write_doc(const fs::path& dir, const std::string& name, const json& doc) {
  const fs::path p = dir / name;
  std::ofstream(p) << doc.dump(2);
  return p;
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string& header) {
  std::ifstream in(p);
  std::getline(in, header);
  std::vector<std::vector<double>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<double> row;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

// Key structure only, values dropped.
json shape(const json& j) {
  if (j.is_object()) {
    json out = json::object();
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = shape(it.value());
    return out;
  }
  if (j.is_array()) return "array";
  return j.is_null() ? "null" : "value";
}

const std::string& planned_dir() {
  static const std::string dir = [] {
    const fs::path d = scratch("plan");
    const Run r = run("plan " FLATPLAN_CONFIG_DIR "/two_link.json -o " + d.string());
    REQUIRE(r.code == 0);
    return d.string();
  }();
  return dir;
}

}  // namespace

TEST_CASE("plan writes every artifact for the bundled two-link config") {
  const fs::path d = planned_dir();
  for (const char* f : {"trajectory.csv", "report.json", "coeffs.json", "plot_angle.svg", "plot_velocity.svg",
                        "plot_torque.svg"}) {
    CHECK(fs::exists(d / f));
  }
  const std::string svg = slurp(d / "plot_torque.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("stroke-dasharray") != std::string::npos);

  const json report = json::parse(slurp(d / "report.json"));
  CHECK(report["status"] == "ok");
  CHECK(report["error"].is_null());
  CHECK(report["stages"]["lp"]["report"]["torque_feasible"] == false);
  CHECK(report["stages"]["lp"]["report"]["state_feasible"] == true);
  CHECK(report["stages"]["feas"]["report"]["feasible"] == true);
  CHECK(report["stages"]["opt"]["report"]["feasible"] == true);
  CHECK(report["stages"]["opt"]["t_f"].get<double>() < report["stages"]["feas"]["t_f"].get<double>());
  CHECK(report["config"]["basis"]["m"] == 10);
  const json coeffs = json::parse(slurp(d / "coeffs.json"));
  CHECK(coeffs["run_id"] == report["run_id"]);
}

TEST_CASE("trajectory table has the requested rows and meets the boundary states") {
  const fs::path d = planned_dir();
  std::string header;
  const auto rows = read_csv(d / "trajectory.csv", header);
  CHECK(header == "t,q_1,q_2,qd_1,qd_2,qdd_1,qdd_2,tau_1,tau_2");
  REQUIRE(rows.size() == 1000);
  const json report = json::parse(slurp(d / "report.json"));
  CHECK(rows.front()[0] == 0.0);
  CHECK(rows.back()[0] == report["stages"]["opt"]["t_f"].get<double>());
  const double q0[] = {0.0, 0.0}, qf[] = {M_PI, -M_PI};
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(rows.front()[1 + i] - q0[i]) <= 1e-8);
    CHECK(std::abs(rows.back()[1 + i] - qf[i]) <= 1e-8);
    CHECK(std::abs(rows.front()[3 + i]) <= 1e-8);
    CHECK(std::abs(rows.back()[3 + i]) <= 1e-8);
  }
}

TEST_CASE("re-running plan gives a byte-identical table and a stable report schema") {
  const fs::path d = scratch("again");
  const Run r = run("plan " FLATPLAN_CONFIG_DIR "/two_link.json -o " + d.string() + " --no-plots --samples 1000");
  REQUIRE(r.code == 0);
  CHECK(slurp(d / "trajectory.csv") == slurp(fs::path(planned_dir()) / "trajectory.csv"));
  CHECK(slurp(d / "coeffs.json") == slurp(fs::path(planned_dir()) / "coeffs.json"));
  CHECK_FALSE(fs::exists(d / "plot_angle.svg"));
  const json a = json::parse(slurp(d / "report.json"));
  const json b = json::parse(slurp(fs::path(planned_dir()) / "report.json"));
  CHECK(shape(a) == shape(b));
  CHECK(a["run_id"] == b["run_id"]);
}

TEST_CASE("--samples sets the table length") {
  const fs::path d = scratch("samples");
  REQUIRE(run("plan " FLATPLAN_CONFIG_DIR "/two_link.json -o " + d.string() + " --no-plots --samples 37").code == 0);
  std::string header;
  CHECK(read_csv(d / "trajectory.csv", header).size() == 37);
}

TEST_CASE("verify accepts stage opt and rejects stage lp on torque") {
  const std::string coeffs = (fs::path(planned_dir()) / "coeffs.json").string();
  const Run opt = run("verify " FLATPLAN_CONFIG_DIR "/two_link.json " + coeffs);
  CHECK(opt.code == 0);
  CHECK(opt.output.find("feasible") != std::string::npos);
  const Run lp = run("verify " FLATPLAN_CONFIG_DIR "/two_link.json " + coeffs + " --stage lp");
  CHECK(lp.code == 1);
  CHECK(lp.output.find("torque") != std::string::npos);
  CHECK(lp.output.find("VIOLATED") != std::string::npos);
  CHECK(run("verify " FLATPLAN_CONFIG_DIR "/two_link.json " + coeffs + " --stage feas").code == 0);
}

TEST_CASE("verify accepts a hand-written constant trajectory") {
  const fs::path d = scratch("constant");
  json coeffs = {{"basis", {{"type", "polynomial"}, {"m", 4}}},
                 {"t_f", 2.0},
                 {"A", {{0.5, 0.0, 0.0, 0.0}, {-0.25, 0.0, 0.0, 0.0}}}};
  const Run r = run("verify " FLATPLAN_CONFIG_DIR "/two_link.json " + write_doc(d, "c.json", coeffs).string());
  CHECK(r.code == 0);
}

TEST_CASE("verify exits 2 on unreadable or malformed inputs") {
  const fs::path d = scratch("bad_verify");
  std::ofstream(d / "broken.json") << "{ not json";
  CHECK(run("verify " FLATPLAN_CONFIG_DIR "/two_link.json " + (d / "broken.json").string()).code == 2);
  CHECK(run("verify " FLATPLAN_CONFIG_DIR "/two_link.json " + (d / "missing.json").string()).code == 2);
  json wrong = {{"basis", {{"type", "polynomial"}, {"m", 4}}}, {"t_f", 2.0}, {"A", {{0.5, 0.0}}}};
  CHECK(run("verify " FLATPLAN_CONFIG_DIR "/two_link.json " + write_doc(d, "w.json", wrong).string()).code == 2);
}

TEST_CASE("q_lb above q_ub is a config error") {
  const fs::path d = scratch("config_error");
  json doc = two_link_doc();
  doc["limits"]["q_min"][0] = 4.0;
  const Run r = run("plan " + write_doc(d, "cfg.json", doc).string() + " -o " + (d / "out").string());
  CHECK(r.code == 2);
  const json report = json::parse(slurp(d / "out" / "report.json"));
  CHECK(report["error"]["code"] == "config_error");
  CHECK(report["error"]["exit_code"] == 2);
}

TEST_CASE("tiny torque bounds exit 4 with premise margins") {
  const fs::path d = scratch("premise");
  json doc = two_link_doc();
  doc["limits"]["tau_min"] = {-0.1, -0.1};
  doc["limits"]["tau_max"] = {0.1, 0.1};
  const Run r = run("plan " + write_doc(d, "cfg.json", doc).string() + " -o " + (d / "out").string());
  CHECK(r.code == 4);
  const json report = json::parse(slurp(d / "out" / "report.json"));
  CHECK(report["error"]["code"] == "premise_violated");
  CHECK(report["error"]["margins"].size() == 2);
  CHECK(report["error"]["margins"][0].get<double>() < 0.0);
  CHECK_FALSE(fs::exists(d / "out" / "trajectory.csv"));
}

TEST_CASE("a state-infeasible problem exits 3 with the LP certificate") {
  const fs::path d = scratch("state");
  json doc = two_link_doc();
  doc["limits"]["qd_min"][1] = 0.0;
  doc["limits"]["qd_max"][1] = 0.0;
  const Run r = run("plan " + write_doc(d, "cfg.json", doc).string() + " -o " + (d / "out").string());
  CHECK(r.code == 3);
  const json report = json::parse(slurp(d / "out" / "report.json"));
  CHECK(report["error"]["certificate"]["phase_one_objective"].get<double>() > 0.0);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run("").code == 2);
  CHECK(run("plan").code == 2);
  CHECK(run("frobnicate x").code == 2);
}

TEST_CASE("config documents round-trip through the loader") {
  const flatplan::PlanningProblem pb = flatplan::load_problem_file(FLATPLAN_CONFIG_DIR "/six_dof_generic.json");
  const json echo = flatplan::problem_to_json(pb);
  const flatplan::PlanningProblem again = flatplan::load_problem(echo);
  CHECK(flatplan::problem_to_json(again) == echo);
  json bad = echo;
  bad["solver"]["bogus"] = 1;
  CHECK_THROWS(flatplan::load_problem(bad));
}
