// Serial-chain robot models: links with joint twists, home offsets and
// spatial inertias, plus the gravity vector.

#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "flatplan/se3.hpp"

namespace flatplan {

/// Diagonal floor added to the rotational inertia so point-mass links stay SPD.
inline constexpr double kInertiaFloor = 1e-9;

/// 6x6 body inertia for twists ordered (omega, v):
///   [[I_c + m hat(c) hat(c)^T, m hat(c)], [m hat(c)^T, m I]]
struct SpatialInertia {
  double mass = 0.0;
  Eigen::Vector3d com = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotational = Eigen::Matrix3d::Zero();  // about the COM
  se3::Mat6<double> matrix = se3::Mat6<double>::Zero();
};

/// Assembles the spatial inertia. Throws ConfigError when mass <= 0 or
/// I_c is asymmetric beyond 1e-9. The kInertiaFloor regularization is
/// applied to the diagonal of I_c.
SpatialInertia spatial_inertia(double mass, const Eigen::Vector3d& com,
                               const Eigen::Matrix3d& rotational);

struct LinkSpec {
  std::string label;
  se3::Twist joint_twist = se3::Twist::Zero();  // in this link's frame at q = 0
  se3::RigidTransform home_offset;               // parent frame -> link frame at q = 0
  SpatialInertia inertia;
};

struct RobotModel {
  std::vector<LinkSpec> links;
  Eigen::Vector3d gravity = Eigen::Vector3d(0.0, 0.0, -9.8);

  int dof() const { return static_cast<int>(links.size()); }
};

enum class Severity { warning, error };

struct Diagnostic {
  Severity severity = Severity::error;
  int link = 0;  // 1-based link index, 0 for model-level findings
  std::string message;
};

std::vector<Diagnostic> validate_model(const RobotModel& model);

/// Parses the `robot` object of a configuration document. Joint twists are
/// normalized (|omega| = 1 for revolute, |v| = 1 for prismatic).
/// Throws ConfigError naming the link index and field path on failure.
RobotModel load_robot(const nlohmann::json& robot);

nlohmann::json serialize_robot(const RobotModel& model);

/// Two-link planar arm used throughout the tests: unit links, 0.5 kg point
/// masses at the tips, revolute joints about z, gravity (0, -9.8, 0), so
/// q = 0 hangs straight down.
RobotModel reference_two_link();

/// Normalizes a joint twist; throws ConfigError on a zero twist.
se3::Twist normalize_twist(const se3::Twist& xi);

}  // namespace flatplan
