#ifndef BIMANIP_MODEL_HPP
#define BIMANIP_MODEL_HPP

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace bimanip {

/// Thrown on malformed or inconsistent configuration files.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Rigid transform: position in meters, unit quaternion orientation.
struct Pose {
  Eigen::Vector3d position{Eigen::Vector3d::Zero()};
  Eigen::Quaterniond orientation{Eigen::Quaterniond::Identity()};

  static Pose Identity() { return {}; }
  static Pose FromMatrix(const Eigen::Isometry3d& T);

  Eigen::Isometry3d matrix() const;
  Pose operator*(const Pose& rhs) const;
  Pose inverse() const;
  Eigen::Vector3d apply(const Eigen::Vector3d& p) const;

  /// Position distance [m] and rotation angle [rad] to another pose.
  double positionDistance(const Pose& other) const;
  double rotationDistance(const Pose& other) const;

  bool isNormalized(double tol = 1e-9) const;
};

/// One revolute joint: fixed link transform followed by rotation about axis.
struct JointSpec {
  Eigen::Vector3d axis{Eigen::Vector3d::UnitZ()};  ///< unit axis in joint frame
  Pose origin;                 ///< parent frame -> joint frame (at q = 0)
  double lower = 0.0;          ///< l- [rad]
  double upper = 0.0;          ///< l+ [rad]
  double velocity_limit = 0.0; ///< [rad/s], > 0
  double acceleration_limit = 0.0; ///< [rad/s^2], > 0

  double midpoint() const { return 0.5 * (lower + upper); }
  double range() const { return upper - lower; }
};

/// Parallel gripper description.
struct GripperSpec {
  double max_opening = 0.085;      ///< [m]
  double force_min = 30.0;         ///< [N]
  double force_max = 100.0;        ///< [N]
  double open_close_height_delta = 0.0139; ///< fingertip z shift open->closed [m]
  bool compliant_fingertips = true;
};

/// Per-axis sensing ranges of the wrist F/T sensor.
struct SensorRange {
  Eigen::Vector3d force{32.0, 32.0, 100.0};  ///< [N]
  Eigen::Vector3d torque{2.5, 2.5, 2.5};     ///< [Nm]
};

struct ManipulatorModel {
  std::string name;
  std::vector<JointSpec> joints;
  Pose base_pose;      ///< robot base in world frame
  Pose sensor_offset;  ///< flange -> F/T sensor frame O_s
  GripperSpec gripper;
  SensorRange sensor_range;

  int dof() const { return static_cast<int>(joints.size()); }
  Eigen::VectorXd midConfiguration() const;
  bool withinLimits(const Eigen::VectorXd& q, double margin = 0.0) const;
  void validate() const;  ///< throws ConfigError on any invariant violation
};

struct JointState {
  Eigen::VectorXd q;    ///< [rad]
  Eigen::VectorXd qd;   ///< [rad/s]
  Eigen::VectorXd qdd;  ///< [rad/s^2]

  static JointState Zero(int n);
};

struct Wrench {
  Eigen::Vector3d force{Eigen::Vector3d::Zero()};   ///< [N]
  Eigen::Vector3d torque{Eigen::Vector3d::Zero()};  ///< [Nm]
  std::string frame;

  Eigen::Matrix<double, 6, 1> vector() const;
  static Wrench FromVector(const Eigen::Matrix<double, 6, 1>& v,
                           std::string frame = {});
};

struct HoleSpec {
  Eigen::Vector3d local_position{Eigen::Vector3d::Zero()}; ///< on object, [m]
  double diameter = 0.0; ///< d_H [m]
  double depth = 0.0;    ///< [m]
};

struct SceneObject {
  enum class Kind { Table, Stick, Pin, Obstacle };
  Kind kind = Kind::Obstacle;
  std::string name;
  // Box objects use extents, cylinders use radius/length.
  std::optional<Eigen::Vector3d> box_extents;  ///< full extents [m]
  std::optional<double> cylinder_radius;       ///< [m]
  std::optional<double> cylinder_length;       ///< [m]
  Pose pose;
  std::vector<HoleSpec> holes;  ///< nonempty only for sticks
};

/// Perception noise: uniform (default) or gaussian, always hard-bounded.
struct NoiseModel {
  enum class Distribution { Uniform, Gaussian };
  Distribution distribution = Distribution::Uniform;
  double position_bound = 0.0;     ///< [m], deviation norm bound
  double orientation_bound = 0.0;  ///< [rad], rotation angle bound
  double position_sigma = 0.0;     ///< [m], gaussian only
  double orientation_sigma = 0.0;  ///< [rad], gaussian only
};

using Rng = std::mt19937_64;

/// Draws a perturbed pose; deviation never exceeds the configured bounds.
Pose perturb_pose(const Pose& pose, const NoiseModel& noise, Rng& rng);

/// Loads and validates a manipulator description (JSON, versioned schema).
ManipulatorModel load_model(const std::string& path);
void save_model(const ManipulatorModel& model, const std::string& path);

/// Builds the nominal six-axis reference manipulator used throughout the
/// toolkit. Link lengths and limits are nominal, not vendor-exact.
ManipulatorModel reference_manipulator();

}  // namespace bimanip

#endif
