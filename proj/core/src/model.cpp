#include "bimanip/model.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

namespace bimanip {

using nlohmann::json;

// ---------------------------------------------------------------- Pose

Pose Pose::FromMatrix(const Eigen::Isometry3d& T) {
  Pose p;
  p.position = T.translation();
  p.orientation = Eigen::Quaterniond(T.rotation()).normalized();
  return p;
}

Eigen::Isometry3d Pose::matrix() const {
  Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
  T.linear() = orientation.toRotationMatrix();
  T.translation() = position;
  return T;
}

Pose Pose::operator*(const Pose& rhs) const {
  Pose out;
  out.position = position + orientation * rhs.position;
  out.orientation = (orientation * rhs.orientation).normalized();
  return out;
}

Pose Pose::inverse() const {
  Pose out;
  out.orientation = orientation.conjugate();
  out.position = -(out.orientation * position);
  return out;
}

Eigen::Vector3d Pose::apply(const Eigen::Vector3d& p) const {
  return position + orientation * p;
}

double Pose::positionDistance(const Pose& other) const {
  return (position - other.position).norm();
}

double Pose::rotationDistance(const Pose& other) const {
  return orientation.angularDistance(other.orientation);
}

bool Pose::isNormalized(double tol) const {
  return std::abs(orientation.norm() - 1.0) <= tol;
}

// ---------------------------------------------------- ManipulatorModel

Eigen::VectorXd ManipulatorModel::midConfiguration() const {
  Eigen::VectorXd q(dof());
  for (int j = 0; j < dof(); ++j) q[j] = joints[j].midpoint();
  return q;
}

bool ManipulatorModel::withinLimits(const Eigen::VectorXd& q,
                                    double margin) const {
  if (q.size() != dof()) return false;
  for (int j = 0; j < dof(); ++j) {
    if (q[j] < joints[j].lower + margin || q[j] > joints[j].upper - margin)
      return false;
  }
  return true;
}

void ManipulatorModel::validate() const {
  if (joints.empty()) throw ConfigError(name + ": no joints");
  for (std::size_t j = 0; j < joints.size(); ++j) {
    const auto& jt = joints[j];
    const std::string tag = name + " joint " + std::to_string(j + 1);
    if (!(jt.lower < jt.upper))
      throw ConfigError(tag + ": lower limit must be < upper limit");
    if (!(jt.velocity_limit > 0.0))
      throw ConfigError(tag + ": velocity limit must be positive");
    if (!(jt.acceleration_limit > 0.0))
      throw ConfigError(tag + ": acceleration limit must be positive");
    if (std::abs(jt.axis.norm() - 1.0) > 1e-9)
      throw ConfigError(tag + ": axis must be a unit vector");
  }
  if (!base_pose.isNormalized() || !sensor_offset.isNormalized())
    throw ConfigError(name + ": pose quaternion not normalized");
  if (gripper.max_opening <= 0.0)
    throw ConfigError(name + ": gripper opening must be positive");
  if (gripper.force_min > gripper.force_max)
    throw ConfigError(name + ": gripper force range inverted");
}

JointState JointState::Zero(int n) {
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n),
          Eigen::VectorXd::Zero(n)};
}

Eigen::Matrix<double, 6, 1> Wrench::vector() const {
  Eigen::Matrix<double, 6, 1> v;
  v << force, torque;
  return v;
}

Wrench Wrench::FromVector(const Eigen::Matrix<double, 6, 1>& v,
                          std::string frame) {
  return {v.head<3>(), v.tail<3>(), std::move(frame)};
}

// ---------------------------------------------------------- perturb

Pose perturb_pose(const Pose& pose, const NoiseModel& noise, Rng& rng) {
  Eigen::Vector3d dp = Eigen::Vector3d::Zero();
  double angle = 0.0;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();

  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto random_axis = [&]() {
    Eigen::Vector3d a;
    do {
      a = Eigen::Vector3d(unit(rng), unit(rng), unit(rng));
    } while (a.squaredNorm() < 1e-12 || a.squaredNorm() > 1.0);
    return a.normalized();
  };

  if (noise.distribution == NoiseModel::Distribution::Uniform) {
    if (noise.position_bound > 0.0) {
      // Uniform in the ball of radius position_bound.
      do {
        dp = noise.position_bound *
             Eigen::Vector3d(unit(rng), unit(rng), unit(rng));
      } while (dp.norm() > noise.position_bound);
    }
    if (noise.orientation_bound > 0.0) {
      axis = random_axis();
      angle = noise.orientation_bound * unit(rng);
    }
  } else {
    std::normal_distribution<double> gp(0.0, noise.position_sigma);
    std::normal_distribution<double> ga(0.0, noise.orientation_sigma);
    if (noise.position_sigma > 0.0) {
      dp = Eigen::Vector3d(gp(rng), gp(rng), gp(rng));
      if (noise.position_bound > 0.0 && dp.norm() > noise.position_bound)
        dp *= noise.position_bound / dp.norm();
    }
    if (noise.orientation_sigma > 0.0) {
      axis = random_axis();
      angle = ga(rng);
      if (noise.orientation_bound > 0.0)
        angle = std::clamp(angle, -noise.orientation_bound,
                           noise.orientation_bound);
    }
  }

  Pose out = pose;
  out.position += dp;
  if (angle != 0.0) {
    out.orientation =
        (Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis)) * out.orientation)
            .normalized();
  }
  return out;
}

// ----------------------------------------------------------- config IO

namespace {

double length_to_m(const json& j, const std::string& key) {
  const json& field = j.at(key);
  if (field.is_number()) return field.get<double>();  // meters by default
  const double value = field.at("value").get<double>();
  const std::string unit = field.at("unit").get<std::string>();
  if (unit == "m") return value;
  if (unit == "mm") return value * 1e-3;
  if (unit == "cm") return value * 1e-2;
  throw ConfigError("unknown length unit '" + unit + "' for " + key);
}

json length_mm(double meters) {
  return json{{"value", meters * 1e3}, {"unit", "mm"}};
}

Pose pose_from_json(const json& j) {
  Pose p;
  if (j.contains("position")) {
    auto v = j.at("position").get<std::vector<double>>();
    if (v.size() != 3) throw ConfigError("pose position needs 3 entries");
    p.position = Eigen::Vector3d(v[0], v[1], v[2]);
  }
  if (j.contains("quaternion")) {
    auto v = j.at("quaternion").get<std::vector<double>>();  // w x y z
    if (v.size() != 4) throw ConfigError("pose quaternion needs 4 entries");
    p.orientation = Eigen::Quaterniond(v[0], v[1], v[2], v[3]);
    if (!p.isNormalized(1e-6))
      throw ConfigError("pose quaternion far from unit norm");
    p.orientation.normalize();
  } else if (j.contains("rpy")) {
    auto v = j.at("rpy").get<std::vector<double>>();
    if (v.size() != 3) throw ConfigError("pose rpy needs 3 entries");
    p.orientation = Eigen::AngleAxisd(v[2], Eigen::Vector3d::UnitZ()) *
                    Eigen::AngleAxisd(v[1], Eigen::Vector3d::UnitY()) *
                    Eigen::AngleAxisd(v[0], Eigen::Vector3d::UnitX());
  }
  return p;
}

json pose_to_json(const Pose& p) {
  return json{
      {"position", {p.position.x(), p.position.y(), p.position.z()}},
      {"quaternion",
       {p.orientation.w(), p.orientation.x(), p.orientation.y(),
        p.orientation.z()}}};
}

}  // namespace

ManipulatorModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }

  if (!j.contains("version"))
    throw ConfigError(path + ": missing required 'version' field");

  ManipulatorModel m;
  try {
    m.name = j.value("name", "manipulator");
    for (const auto& jj : j.at("joints")) {
      JointSpec spec;
      auto axis = jj.at("axis").get<std::vector<double>>();
      if (axis.size() != 3) throw ConfigError("joint axis needs 3 entries");
      spec.axis = Eigen::Vector3d(axis[0], axis[1], axis[2]).normalized();
      if (jj.contains("origin")) spec.origin = pose_from_json(jj.at("origin"));
      spec.lower = jj.at("lower").get<double>();
      spec.upper = jj.at("upper").get<double>();
      spec.velocity_limit = jj.at("velocity_limit").get<double>();
      spec.acceleration_limit = jj.at("acceleration_limit").get<double>();
      m.joints.push_back(spec);
    }
    if (j.contains("base_pose")) m.base_pose = pose_from_json(j.at("base_pose"));
    if (j.contains("sensor_offset"))
      m.sensor_offset = pose_from_json(j.at("sensor_offset"));
    if (j.contains("gripper")) {
      const json& g = j.at("gripper");
      m.gripper.max_opening = length_to_m(g, "max_opening");
      if (g.contains("force_range")) {
        auto fr = g.at("force_range").get<std::vector<double>>();
        if (fr.size() != 2) throw ConfigError("gripper force_range needs 2");
        m.gripper.force_min = fr[0];
        m.gripper.force_max = fr[1];
      }
      if (g.contains("open_close_height_delta"))
        m.gripper.open_close_height_delta =
            length_to_m(g, "open_close_height_delta");
      m.gripper.compliant_fingertips = g.value("compliant_fingertips", true);
    }
    if (j.contains("sensor_range")) {
      const json& s = j.at("sensor_range");
      auto f = s.at("force").get<std::vector<double>>();
      auto t = s.at("torque").get<std::vector<double>>();
      if (f.size() != 3 || t.size() != 3)
        throw ConfigError("sensor_range needs 3+3 entries");
      m.sensor_range.force = Eigen::Vector3d(f[0], f[1], f[2]);
      m.sensor_range.torque = Eigen::Vector3d(t[0], t[1], t[2]);
    }
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }

  m.validate();
  return m;
}

void save_model(const ManipulatorModel& model, const std::string& path) {
  json j;
  j["version"] = 1;
  j["name"] = model.name;
  j["joints"] = json::array();
  for (const auto& jt : model.joints) {
    j["joints"].push_back(
        {{"axis", {jt.axis.x(), jt.axis.y(), jt.axis.z()}},
         {"origin", pose_to_json(jt.origin)},
         {"lower", jt.lower},
         {"upper", jt.upper},
         {"velocity_limit", jt.velocity_limit},
         {"acceleration_limit", jt.acceleration_limit}});
  }
  j["base_pose"] = pose_to_json(model.base_pose);
  j["sensor_offset"] = pose_to_json(model.sensor_offset);
  j["gripper"] = {
      {"max_opening", length_mm(model.gripper.max_opening)},
      {"force_range", {model.gripper.force_min, model.gripper.force_max}},
      {"open_close_height_delta",
       length_mm(model.gripper.open_close_height_delta)},
      {"compliant_fingertips", model.gripper.compliant_fingertips}};
  j["sensor_range"] = {
      {"force",
       {model.sensor_range.force.x(), model.sensor_range.force.y(),
        model.sensor_range.force.z()}},
      {"torque",
       {model.sensor_range.torque.x(), model.sensor_range.torque.y(),
        model.sensor_range.torque.z()}}};

  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write model file: " + path);
  out << j.dump(2) << "\n";
}

ManipulatorModel reference_manipulator() {
  // Nominal six-axis arm in the 500 mm reach class. Link lengths and joint
  // limits are plausible values for this class, not vendor data.
  ManipulatorModel m;
  m.name = "reference-6r";

  auto joint = [](Eigen::Vector3d axis, Eigen::Vector3d offset, double lo,
                  double hi, double vel, double acc) {
    JointSpec j;
    j.axis = axis.normalized();
    j.origin.position = offset;
    j.lower = lo;
    j.upper = hi;
    j.velocity_limit = vel;
    j.acceleration_limit = acc;
    return j;
  };

  const double d2r = M_PI / 180.0;
  m.joints = {
      joint({0, 0, 1}, {0.0, 0.0, 0.345}, -170 * d2r, 170 * d2r, 3.9, 15.0),
      joint({0, 1, 0}, {0.0, 0.0, 0.0}, -120 * d2r, 120 * d2r, 3.5, 12.0),
      joint({0, 1, 0}, {0.0, 0.0, 0.305}, -130 * d2r, 150 * d2r, 4.5, 15.0),
      joint({0, 0, 1}, {-0.010, 0.0, 0.150}, -270 * d2r, 270 * d2r, 5.7, 20.0),
      joint({0, 1, 0}, {0.0, 0.0, 0.150}, -120 * d2r, 120 * d2r, 5.7, 20.0),
      joint({0, 0, 1}, {0.0, 0.0, 0.070}, -360 * d2r, 360 * d2r, 8.0, 25.0),
  };
  m.sensor_offset.position = Eigen::Vector3d(0.0, 0.0, 0.035);
  m.validate();
  return m;
}

}  // namespace bimanip
