// Run artifacts: trajectory table, report document, coefficient file and
// SVG plots.

#pragma once

#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "flatplan/planner.hpp"

namespace flatplan {

/// Process exit code for a plan status.
int exit_code(PlanStatus status);

/// Deterministic id derived from the configuration echo.
std::string run_id(const nlohmann::json& config);

/// Header t, q_1..q_n, qd_1..qd_n, qdd_1..qdd_n, tau_1..tau_n, then
/// `samples` rows at uniform t in [0, t_f], 17 significant digits.
void write_trajectory_csv(std::ostream& os, const TimeScaledTrajectory& traj, const RobotModel& model, int samples);

nlohmann::json report_to_json(const ConstraintReport& report);

/// Stage summaries, premise, line-search and NLP logs, timings, config echo
/// and an `error` block (null when status is ok).
nlohmann::json plan_report(const PlanResult& result, const PlanningProblem& problem);

/// Report for a run that never reached the planner (exit 2).
nlohmann::json config_error_report(const std::string& message);

/// Basis spec plus (A, t_f) for every present stage.
nlohmann::json coefficients_json(const PlanResult& result, const PlanningProblem& problem);

/// Reads one stage from a coefficient document. Accepts the `stages` layout
/// written by coefficients_json or a single top-level {basis, A, t_f}. With
/// an empty name the opt stage is used, else the last present one. Throws
/// ConfigError on malformed input.
TimeScaledTrajectory load_coefficients(const nlohmann::json& doc, const std::string& stage = {});

enum class PlotQuantity { angle, velocity, torque };

/// One panel per joint with every present stage overlaid against the
/// true bounds (dashed).
std::string plot_svg(const PlanResult& result, const PlanningProblem& problem, PlotQuantity quantity,
                     int samples = 400);

}  // namespace flatplan
