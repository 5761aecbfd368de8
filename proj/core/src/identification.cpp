#include "bimanip/identification.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

namespace bimanip {

Eigen::Matrix<double, 16, 1> InertialParams::vector() const {
  Eigen::Matrix<double, 16, 1> v;
  v << force_offset, torque_offset, mass, first_moment, inertia;
  return v;
}

InertialParams InertialParams::FromVector(
    const Eigen::Matrix<double, 16, 1>& v) {
  InertialParams p;
  p.force_offset = v.segment<3>(0);
  p.torque_offset = v.segment<3>(3);
  p.mass = v[6];
  p.first_moment = v.segment<3>(7);
  p.inertia = v.segment<6>(10);
  return p;
}

Eigen::Matrix3d InertialParams::inertiaMatrix() const {
  Eigen::Matrix3d I;
  I << inertia[0], inertia[1], inertia[2],
       inertia[1], inertia[3], inertia[4],
       inertia[2], inertia[4], inertia[5];
  return I;
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d S;
  S <<    0.0, -v.z(),  v.y(),
        v.z(),    0.0, -v.x(),
       -v.y(),  v.x(),    0.0;
  return S;
}

Eigen::Matrix<double, 3, 6> angular_matrix(const Eigen::Vector3d& w) {
  // Row r picks the vec(I) entries that multiply into (I*w)_r with the
  // (Ixx, Ixy, Ixz, Iyy, Iyz, Izz) ordering.
  Eigen::Matrix<double, 3, 6> L;
  L << w.x(), w.y(), w.z(),   0.0,   0.0,   0.0,
         0.0, w.x(),   0.0, w.y(), w.z(),   0.0,
         0.0,   0.0, w.x(),   0.0, w.y(), w.z();
  return L;
}

Eigen::Matrix<double, 6, 10> regressor(const SensorKinematics& kin) {
  const Eigen::Matrix3d Sw = skew(kin.angular_velocity);
  const Eigen::Matrix3d Sdw = skew(kin.angular_acceleration);
  Eigen::Matrix<double, 6, 10> A = Eigen::Matrix<double, 6, 10>::Zero();
  A.block<3, 1>(0, 0) = kin.linear_acceleration;
  A.block<3, 3>(0, 1) = Sdw + Sw * Sw;
  A.block<3, 3>(3, 1) = -skew(kin.linear_acceleration);
  A.block<3, 6>(3, 4) = angular_matrix(kin.angular_acceleration) +
                        Sw * angular_matrix(kin.angular_velocity);
  return A;
}

Eigen::Matrix<double, 6, 16> augmented_regressor(const SensorKinematics& kin) {
  Eigen::Matrix<double, 6, 16> A;
  A.block<6, 6>(0, 0).setIdentity();
  A.block<6, 10>(0, 6) = regressor(kin);
  return A;
}

Wrench predicted_wrench(const SensorKinematics& kin,
                        const InertialParams& params) {
  Eigen::Matrix<double, 6, 1> f = augmented_regressor(kin) * params.vector();
  return Wrench::FromVector(f, "O_s");
}

std::pair<InertialParams, FitReport> estimate_parameters(
    const std::vector<WrenchSample>& samples, const ManipulatorModel& model,
    const Eigen::Vector3d& gravity) {
  if (samples.size() < 3)
    throw std::invalid_argument("estimate_parameters: need at least 3 samples");

  const int rows = static_cast<int>(samples.size()) * 6;
  Eigen::MatrixXd A(rows, 16);
  Eigen::VectorXd b(rows);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    SensorKinematics kin = sensor_kinematics(model, samples[i].state, gravity);
    A.block<6, 16>(6 * static_cast<int>(i), 0) = augmented_regressor(kin);
    b.segment<6>(6 * static_cast<int>(i)) = samples[i].measured.vector();
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-9);
  const int rank = static_cast<int>(qr.rank());
  if (rank < 16) {
    throw RankDeficiencyError(
        "estimate_parameters: insufficient excitation, " +
            std::to_string(16 - rank) +
            "-dimensional parameter subspace is unobservable",
        16 - rank);
  }

  Eigen::VectorXd phi = qr.solve(b);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& sv = svd.singularValues();

  FitReport report;
  report.rank = rank;
  report.condition_number = sv[0] / sv[sv.size() - 1];
  report.residual_rms = std::sqrt((A * phi - b).squaredNorm() / rows);
  report.mass_physical = phi[6] >= 0.0;

  Eigen::Matrix<double, 16, 1> phi16 = phi;
  return {InertialParams::FromVector(phi16), report};
}

Wrench external_wrench(const Wrench& measured, const SensorKinematics& kin,
                       const InertialParams& params) {
  Eigen::Matrix<double, 6, 1> f =
      measured.vector() - augmented_regressor(kin) * params.vector();
  return Wrench::FromVector(f, measured.frame);
}

}  // namespace bimanip
