#include "bimanip/kinematics.hpp"

#include <cmath>

namespace bimanip {

namespace {

struct ChainFrames {
  // Per joint: axis direction and joint-origin position in the world frame.
  std::vector<Eigen::Vector3d> axes;
  std::vector<Eigen::Vector3d> origins;
  Pose flange;
};

ChainFrames chain_frames(const ManipulatorModel& model,
                         const Eigen::VectorXd& q) {
  ChainFrames out;
  const int n = model.dof();
  out.axes.reserve(n);
  out.origins.reserve(n);
  Pose T = model.base_pose;
  for (int j = 0; j < n; ++j) {
    const JointSpec& jt = model.joints[j];
    Pose pre = T * jt.origin;
    out.axes.push_back(pre.orientation * jt.axis);
    out.origins.push_back(pre.position);
    Pose rot;
    rot.orientation = Eigen::Quaterniond(Eigen::AngleAxisd(q[j], jt.axis));
    T = pre * rot;
  }
  out.flange = T;
  return out;
}

}  // namespace

Pose forward_kinematics(const ManipulatorModel& model, const Eigen::VectorXd& q,
                        FkFrame frame, bool strict) {
  if (q.size() != model.dof())
    throw std::invalid_argument("forward_kinematics: q size mismatch");
  if (strict && !model.withinLimits(q))
    throw std::domain_error("forward_kinematics: joint limits violated");
  Pose flange = chain_frames(model, q).flange;
  return frame == FkFrame::Flange ? flange : flange * model.sensor_offset;
}

Eigen::MatrixXd jacobian(const ManipulatorModel& model,
                         const Eigen::VectorXd& q, FkFrame frame) {
  if (q.size() != model.dof())
    throw std::invalid_argument("jacobian: q size mismatch");
  const int n = model.dof();
  ChainFrames frames = chain_frames(model, q);
  Eigen::Vector3d tip = frame == FkFrame::Flange
                            ? frames.flange.position
                            : (frames.flange * model.sensor_offset).position;
  Eigen::MatrixXd J(6, n);
  for (int j = 0; j < n; ++j) {
    const Eigen::Vector3d& z = frames.axes[j];
    J.col(j).head<3>() = z.cross(tip - frames.origins[j]);
    J.col(j).tail<3>() = z;
  }
  return J;
}

SensorKinematics sensor_kinematics(const ManipulatorModel& model,
                                   const JointState& state,
                                   const Eigen::Vector3d& gravity) {
  const int n = model.dof();
  ChainFrames frames = chain_frames(model, state.q);
  const Pose sensor = frames.flange * model.sensor_offset;
  const Eigen::Vector3d ps = sensor.position;

  // All joint axes move with the preceding joints, so velocity and
  // acceleration of the sensor point follow by accumulating the per-joint
  // contributions in the world frame.
  Eigen::Vector3d w = Eigen::Vector3d::Zero();
  Eigen::Vector3d dw = Eigen::Vector3d::Zero();
  Eigen::Vector3d vs = Eigen::Vector3d::Zero();
  for (int j = 0; j < n; ++j) {
    const Eigen::Vector3d& z = frames.axes[j];
    dw += state.qdd[j] * z + state.qd[j] * w.cross(z);
    w += state.qd[j] * z;
    vs += state.qd[j] * z.cross(ps - frames.origins[j]);
  }

  Eigen::Vector3d as = Eigen::Vector3d::Zero();
  Eigen::Vector3d w_before = Eigen::Vector3d::Zero();
  for (int j = 0; j < n; ++j) {
    const Eigen::Vector3d& z = frames.axes[j];
    const Eigen::Vector3d r = ps - frames.origins[j];
    // Velocity of the joint-j origin point.
    Eigen::Vector3d vj = Eigen::Vector3d::Zero();
    for (int k = 0; k < j; ++k)
      vj += state.qd[k] *
            frames.axes[k].cross(frames.origins[j] - frames.origins[k]);
    as += state.qdd[j] * z.cross(r) +
          state.qd[j] * (w_before.cross(z)).cross(r) +
          state.qd[j] * z.cross(vs - vj);
    w_before += state.qd[j] * z;
  }

  const Eigen::Matrix3d Rs = sensor.orientation.toRotationMatrix();
  SensorKinematics out;
  out.world_pose = sensor;
  out.angular_velocity = Rs.transpose() * w;
  out.angular_acceleration = Rs.transpose() * dw;
  out.linear_velocity = Rs.transpose() * vs;
  out.linear_acceleration = Rs.transpose() * (as - gravity);
  return out;
}

Eigen::Vector3d orientation_error(const Eigen::Quaterniond& from,
                                  const Eigen::Quaterniond& to) {
  Eigen::Quaterniond dq = to * from.conjugate();
  if (dq.w() < 0.0) dq.coeffs() *= -1.0;
  Eigen::AngleAxisd aa(dq);
  return aa.angle() * aa.axis();
}

Eigen::VectorXd inverse_kinematics(const ManipulatorModel& model,
                                   const Pose& target,
                                   const Eigen::VectorXd& seed,
                                   const IkParams& params) {
  const int n = model.dof();
  if (seed.size() != n)
    throw std::invalid_argument("inverse_kinematics: seed size mismatch");
  if (!model.withinLimits(seed))
    throw std::invalid_argument("inverse_kinematics: seed outside limits");

  Eigen::VectorXd q = seed;
  for (int iter = 0; iter <= params.max_iterations; ++iter) {
    Pose current = forward_kinematics(model, q);
    Eigen::Matrix<double, 6, 1> err;
    err.head<3>() = target.position - current.position;
    err.tail<3>() = orientation_error(current.orientation, target.orientation);
    if (err.head<3>().norm() < params.position_tol &&
        err.tail<3>().norm() < params.orientation_tol)
      return q;
    if (iter == params.max_iterations) break;

    Eigen::MatrixXd J = jacobian(model, q);
    Eigen::Matrix<double, 6, 6> JJt = J * J.transpose();
    JJt.diagonal().array() += params.damping * params.damping;
    Eigen::VectorXd dq = J.transpose() * JJt.ldlt().solve(err);
    dq = dq.cwiseMax(-params.max_step).cwiseMin(params.max_step);
    q += dq;
    for (int j = 0; j < n; ++j)
      q[j] = std::clamp(q[j], model.joints[j].lower, model.joints[j].upper);
  }
  throw IkError("inverse_kinematics: no convergence after " +
                std::to_string(params.max_iterations) + " iterations");
}

}  // namespace bimanip
