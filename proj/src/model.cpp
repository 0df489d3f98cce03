#include "flatplan/model.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "flatplan/errors.hpp"

namespace flatplan {

namespace {

using nlohmann::json;

std::string link_path(std::size_t index, const std::string& field) {
  std::ostringstream os;
  os << "robot.links[" << index << "]";
  if (!field.empty()) os << "." << field;
  return os.str();
}

[[noreturn]] void fail(const std::string& what, std::size_t index, const std::string& field) {
  std::ostringstream os;
  os << what << ", link " << index + 1 << " (" << link_path(index, field) << ")";
  throw ConfigError(os.str());
}

template <int N>
Eigen::Matrix<double, N, 1> read_vector(const json& node, const std::string& path) {
  if (!node.is_array() || node.size() != static_cast<std::size_t>(N)) {
    throw ConfigError("expected array of " + std::to_string(N) + " numbers at " + path);
  }
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) {
    if (!node[i].is_number()) throw ConfigError("expected number at " + path + "[" + std::to_string(i) + "]");
    v(i) = node[i].get<double>();
    if (!std::isfinite(v(i))) throw ConfigError("non-finite value at " + path);
  }
  return v;
}

Eigen::Matrix3d read_matrix3(const json& node, const std::string& path) {
  const Eigen::Matrix<double, 9, 1> flat = read_vector<9>(node, path);
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = flat(3 * r + c);
  return m;
}

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ConfigError("missing field " + path + "." + key);
  }
  return obj.at(key);
}

bool is_spd(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.info() == Eigen::Success && es.eigenvalues().minCoeff() > 0.0;
}

bool is_rotation(const Eigen::Matrix3d& r, double tol) {
  return (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

}  // namespace

SpatialInertia spatial_inertia(double mass, const Eigen::Vector3d& com,
                               const Eigen::Matrix3d& rotational) {
  if (!(mass > 0.0)) throw ConfigError("non-positive mass");
  if ((rotational - rotational.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ConfigError("asymmetric rotational inertia");
  }
  SpatialInertia out;
  out.mass = mass;
  out.com = com;
  out.rotational = 0.5 * (rotational + rotational.transpose()) +
                   kInertiaFloor * Eigen::Matrix3d::Identity();
  const Eigen::Matrix3d ch = se3::hat3<double>(com);
  out.matrix.topLeftCorner<3, 3>() = out.rotational + mass * ch * ch.transpose();
  out.matrix.topRightCorner<3, 3>() = mass * ch;
  out.matrix.bottomLeftCorner<3, 3>() = mass * ch.transpose();
  out.matrix.bottomRightCorner<3, 3>() = mass * Eigen::Matrix3d::Identity();
  return out;
}

se3::Twist normalize_twist(const se3::Twist& xi) {
  const double wn = xi.head<3>().norm();
  if (wn > 1e-12) return xi / wn;
  const double vn = xi.tail<3>().norm();
  if (vn > 1e-12) {
    se3::Twist out = se3::Twist::Zero();
    out.tail<3>() = xi.tail<3>() / vn;
    return out;
  }
  throw ConfigError("degenerate joint twist");
}

std::vector<Diagnostic> validate_model(const RobotModel& model) {
  std::vector<Diagnostic> out;
  auto error = [&](int link, std::string msg) {
    out.push_back({Severity::error, link, std::move(msg)});
  };
  if (model.links.empty()) error(0, "model has no links");
  if (!model.gravity.allFinite()) {
    error(0, "non-finite gravity");
  } else if (model.gravity.norm() == 0.0) {
    out.push_back({Severity::warning, 0, "zero gravity: torque premise check degenerates"});
  }
  for (std::size_t i = 0; i < model.links.size(); ++i) {
    const LinkSpec& link = model.links[i];
    const int idx = static_cast<int>(i) + 1;
    const std::string name = "link " + std::to_string(idx) + " (" + link.label + ")";
    const double wn = link.joint_twist.head<3>().norm();
    const double vn = link.joint_twist.tail<3>().norm();
    if (!link.joint_twist.allFinite()) {
      error(idx, name + ": non-finite joint twist");
    } else if (wn > 0.0) {
      if (std::abs(wn - 1.0) > 1e-9) error(idx, name + ": revolute axis is not unit length");
    } else if (vn == 0.0) {
      error(idx, name + ": degenerate joint twist");
    } else if (std::abs(vn - 1.0) > 1e-9) {
      error(idx, name + ": prismatic direction is not unit length");
    }
    if (!is_rotation(link.home_offset.rotation, 1e-12)) {
      error(idx, name + ": home offset rotation is not orthonormal");
    }
    if (!(link.inertia.mass > 0.0)) error(idx, name + ": non-positive mass");
    const auto& j = link.inertia.matrix;
    if ((j - j.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      error(idx, name + ": spatial inertia is not symmetric");
    } else if (!is_spd(j)) {
      error(idx, name + ": spatial inertia is not positive definite");
    }
  }
  return out;
}

RobotModel load_robot(const json& robot) {
  if (!robot.is_object()) throw ConfigError("robot must be an object");
  RobotModel model;
  model.gravity = read_vector<3>(require(robot, "gravity", "robot"), "robot.gravity");
  const json& links = require(robot, "links", "robot");
  if (!links.is_array() || links.empty()) throw ConfigError("robot.links must be a non-empty array");

  for (std::size_t i = 0; i < links.size(); ++i) {
    const json& node = links[i];
    const std::string path = link_path(i, "");
    if (!node.is_object()) throw ConfigError(path + " must be an object");
    LinkSpec link;
    link.label = node.value("label", "joint" + std::to_string(i + 1));

    const json& twist = require(node, "twist", path);
    se3::Twist xi;
    xi.head<3>() = read_vector<3>(require(twist, "omega", path + ".twist"), path + ".twist.omega");
    xi.tail<3>() = read_vector<3>(require(twist, "v", path + ".twist"), path + ".twist.v");
    try {
      link.joint_twist = normalize_twist(xi);
    } catch (const ConfigError&) {
      fail("degenerate joint twist", i, "twist");
    }

    if (node.contains("home_offset")) {
      const json& ho = node.at("home_offset");
      Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
      if (ho.contains("rotation")) r = read_matrix3(ho.at("rotation"), path + ".home_offset.rotation");
      if (!is_rotation(r, 1e-6)) fail("home offset rotation is not a rotation", i, "home_offset.rotation");
      // Snap to the nearest rotation so downstream orthonormality holds to round-off.
      Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
      link.home_offset.rotation = svd.matrixU() * svd.matrixV().transpose();
      if (ho.contains("translation")) {
        link.home_offset.translation = read_vector<3>(ho.at("translation"), path + ".home_offset.translation");
      }
    }

    const json& mass = require(node, "mass", path);
    if (!mass.is_number()) fail("mass must be a number", i, "mass");
    const double m = mass.get<double>();
    if (!(m > 0.0)) fail("non-positive mass", i, "mass");
    const Eigen::Vector3d com = read_vector<3>(require(node, "com", path), path + ".com");
    const Eigen::Matrix3d ic = read_matrix3(require(node, "inertia", path), path + ".inertia");
    if ((ic - ic.transpose()).cwiseAbs().maxCoeff() > 1e-9) fail("asymmetric rotational inertia", i, "inertia");
    link.inertia = spatial_inertia(m, com, ic);
    if (!is_spd(link.inertia.matrix)) fail("non-SPD inertia", i, "inertia");
    model.links.push_back(std::move(link));
  }
  return model;
}

json serialize_robot(const RobotModel& model) {
  json links = json::array();
  for (const LinkSpec& link : model.links) {
    const auto& r = link.home_offset.rotation;
    // Undo the floor so a reload reproduces the same inertia.
    const Eigen::Matrix3d ic = link.inertia.rotational - kInertiaFloor * Eigen::Matrix3d::Identity();
    json rot = json::array();
    json inertia = json::array();
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        rot.push_back(r(a, b));
        inertia.push_back(ic(a, b));
      }
    const auto& xi = link.joint_twist;
    const auto& t = link.home_offset.translation;
    const auto& c = link.inertia.com;
    links.push_back({
        {"label", link.label},
        {"twist", {{"omega", {xi(0), xi(1), xi(2)}}, {"v", {xi(3), xi(4), xi(5)}}}},
        {"home_offset", {{"rotation", rot}, {"translation", {t(0), t(1), t(2)}}}},
        {"mass", link.inertia.mass},
        {"com", {c(0), c(1), c(2)}},
        {"inertia", inertia},
    });
  }
  const auto& g = model.gravity;
  return {{"gravity", {g(0), g(1), g(2)}}, {"links", links}};
}

RobotModel reference_two_link() {
  RobotModel model;
  model.gravity = Eigen::Vector3d(0.0, -9.8, 0.0);
  for (int i = 0; i < 2; ++i) {
    LinkSpec link;
    link.label = "joint" + std::to_string(i + 1);
    link.joint_twist << 0, 0, 1, 0, 0, 0;
    if (i == 1) link.home_offset.translation = Eigen::Vector3d(0.0, -1.0, 0.0);
    link.inertia = spatial_inertia(0.5, Eigen::Vector3d(0.0, -1.0, 0.0), Eigen::Matrix3d::Zero());
    model.links.push_back(link);
  }
  return model;
}

}  // namespace flatplan
