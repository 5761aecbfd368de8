#ifndef BIMANIP_KINEMATICS_HPP
#define BIMANIP_KINEMATICS_HPP

#include "bimanip/model.hpp"

namespace bimanip {

/// Velocities and accelerations of the F/T sensor frame O_s, expressed in
/// O_s. The linear acceleration includes gravity, so a robot at rest reads
/// a_s = -g rotated into the sensor frame.
struct SensorKinematics {
  Eigen::Vector3d linear_acceleration;   ///< a_s [m/s^2], gravity included
  Eigen::Vector3d angular_velocity;      ///< w_s [rad/s]
  Eigen::Vector3d angular_acceleration;  ///< dw_s [rad/s^2]
  Eigen::Vector3d linear_velocity;       ///< v_s [m/s]
  Pose world_pose;                       ///< O_s in world frame
};

struct IkParams {
  double damping = 1e-3;
  int max_iterations = 200;
  double max_step = 0.2;          ///< [rad] per-joint step clamp
  double position_tol = 1e-5;     ///< [m]
  double orientation_tol = 1e-5;  ///< [rad]
};

class IkError : public std::runtime_error {
public:
  explicit IkError(const std::string& what) : std::runtime_error(what) {}
};

enum class FkFrame { Flange, Sensor };

/// Flange (or sensor) pose in the world frame.
Pose forward_kinematics(const ManipulatorModel& model, const Eigen::VectorXd& q,
                        FkFrame frame = FkFrame::Flange, bool strict = false);

/// World-frame geometric Jacobian (6 x n) at the flange: rows 1-3 linear,
/// rows 4-6 angular.
Eigen::MatrixXd jacobian(const ManipulatorModel& model,
                         const Eigen::VectorXd& q,
                         FkFrame frame = FkFrame::Flange);

/// Twist and acceleration of the sensor frame for a given joint state.
SensorKinematics sensor_kinematics(const ManipulatorModel& model,
                                   const JointState& state,
                                   const Eigen::Vector3d& gravity);

/// Damped least-squares inverse kinematics. Throws IkError when the target
/// cannot be reached from the seed within the iteration budget.
Eigen::VectorXd inverse_kinematics(const ManipulatorModel& model,
                                   const Pose& target,
                                   const Eigen::VectorXd& seed,
                                   const IkParams& params = {});

/// Orientation error as a rotation vector taking `from` to `to`.
Eigen::Vector3d orientation_error(const Eigen::Quaterniond& from,
                                  const Eigen::Quaterniond& to);

}  // namespace bimanip

#endif
