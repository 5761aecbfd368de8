#ifndef BIMANIP_IDENTIFICATION_HPP
#define BIMANIP_IDENTIFICATION_HPP

#include "bimanip/kinematics.hpp"
#include "bimanip/model.hpp"

namespace bimanip {

/// Inertial description of the end-effector as seen from the sensor frame,
/// augmented with the six measurement offsets. The 16-vector layout is
/// [f0(3), tau0(3), m, c(3), I(6)] with c the first moment m*com [kg m] and
/// the inertia about O_s vectorized as (Ixx, Ixy, Ixz, Iyy, Iyz, Izz).
struct InertialParams {
  Eigen::Vector3d force_offset{Eigen::Vector3d::Zero()};   ///< f0 [N]
  Eigen::Vector3d torque_offset{Eigen::Vector3d::Zero()};  ///< tau0 [Nm]
  double mass = 0.0;                                       ///< m_s [kg]
  Eigen::Vector3d first_moment{Eigen::Vector3d::Zero()};   ///< c_s [kg m]
  Eigen::Matrix<double, 6, 1> inertia{
      Eigen::Matrix<double, 6, 1>::Zero()};                ///< vec(I_s) [kg m^2]

  Eigen::Matrix<double, 16, 1> vector() const;
  static InertialParams FromVector(const Eigen::Matrix<double, 16, 1>& v);
  Eigen::Matrix3d inertiaMatrix() const;
};

struct WrenchSample {
  JointState state;
  Wrench measured;  ///< at O_s, in O_s
  double timestamp = 0.0;
};

struct FitReport {
  double residual_rms = 0.0;
  double condition_number = 0.0;
  int rank = 0;
  bool mass_physical = true;  ///< false when the LS mass came out negative
};

class RankDeficiencyError : public std::runtime_error {
public:
  RankDeficiencyError(const std::string& what, int deficiency)
      : std::runtime_error(what), deficiency(deficiency) {}
  int deficiency;  ///< dimension of the unexcited parameter subspace
};

/// Cross-product matrix: skew(v) * x == v.cross(x).
Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// 3x6 matrix with angular_matrix(w) * vec(I) == I * w for symmetric I.
Eigen::Matrix<double, 3, 6> angular_matrix(const Eigen::Vector3d& w);

/// 6x10 Newton-Euler regressor for one rigid body seen from O_s; columns
/// multiply [m, c, vec(I)].
Eigen::Matrix<double, 6, 10> regressor(const SensorKinematics& kin);

/// 6x16 regressor with the identity block prepended for the offsets.
Eigen::Matrix<double, 6, 16> augmented_regressor(const SensorKinematics& kin);

/// Predicted sensor wrench for a body with the given parameters.
Wrench predicted_wrench(const SensorKinematics& kin,
                        const InertialParams& params);

/// Stacked least-squares estimate of the 16 parameters. Throws
/// RankDeficiencyError when the data do not excite all parameters.
std::pair<InertialParams, FitReport> estimate_parameters(
    const std::vector<WrenchSample>& samples, const ManipulatorModel& model,
    const Eigen::Vector3d& gravity = {0.0, 0.0, -9.80665});

/// Measured wrench minus the modeled end-effector dynamics.
Wrench external_wrench(const Wrench& measured, const SensorKinematics& kin,
                       const InertialParams& params);

}  // namespace bimanip

#endif
