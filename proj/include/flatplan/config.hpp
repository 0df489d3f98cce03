// Planning problem documents: robot, limits, boundary states, basis,
// solver settings and cost, in one JSON object.

#pragma once

#include <string>

#include <json.hpp>

#include "flatplan/planner.hpp"

namespace flatplan {

/// Parses and validates a configuration document. Throws ConfigError with
/// the offending field path.
PlanningProblem load_problem(const nlohmann::json& doc);

/// Reads the file at `path` (ConfigError on I/O or syntax errors).
PlanningProblem load_problem_file(const std::string& path);

/// Inverse of load_problem; round-trips every field.
nlohmann::json problem_to_json(const PlanningProblem& problem);

nlohmann::json basis_to_json(const BasisSpec& spec);
BasisSpec load_basis(const nlohmann::json& node);

}  // namespace flatplan
