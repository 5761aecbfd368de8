#include "bimanip/identification.hpp"

#include "bimanip/excitation.hpp"

#include "doctest.h"

using namespace bimanip;

namespace {

const Eigen::Vector3d kGravity(0.0, 0.0, -9.80665);

InertialParams random_params(Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> um(0.5, 3.0);
  InertialParams p;
  p.mass = um(rng);
  for (int i = 0; i < 3; ++i) {
    p.force_offset[i] = 5.0 * u(rng);
    p.torque_offset[i] = 0.5 * u(rng);
    p.first_moment[i] = 0.05 * p.mass * u(rng);
  }
  // Build a guaranteed positive-definite inertia from a random square root.
  Eigen::Matrix3d S;
  for (int i = 0; i < 9; ++i) S(i / 3, i % 3) = 0.05 * u(rng);
  const Eigen::Matrix3d I =
      S * S.transpose() + 1e-3 * Eigen::Matrix3d::Identity();
  p.inertia << I(0, 0), I(0, 1), I(0, 2), I(1, 1), I(1, 2), I(2, 2);
  return p;
}

std::vector<WrenchSample> synthesize_samples(const ManipulatorModel& model,
                                             const InertialParams& truth,
                                             int n_samples, Rng& rng,
                                             bool moving) {
  std::vector<WrenchSample> samples;
  if (moving) {
    ExcitationParams traj =
        random_feasible_params(model, 4, 2.0 * M_PI * 0.1, rng);
    for (int k = 0; k < n_samples; ++k) {
      WrenchSample s;
      s.timestamp = traj.period() * k / n_samples;
      s.state = eval_trajectory(traj, s.timestamp);
      s.measured =
          predicted_wrench(sensor_kinematics(model, s.state, kGravity), truth);
      samples.push_back(s);
    }
  } else {
    JointState st = JointState::Zero(model.dof());
    for (int j = 0; j < model.dof(); ++j) st.q[j] = model.joints[j].midpoint();
    for (int k = 0; k < n_samples; ++k) {
      WrenchSample s;
      s.timestamp = 0.01 * k;
      s.state = st;
      s.measured =
          predicted_wrench(sensor_kinematics(model, s.state, kGravity), truth);
      samples.push_back(s);
    }
  }
  return samples;
}

}  // namespace

TEST_SUITE_BEGIN("identification");

TEST_CASE("skew matrix realizes the cross product") {
  Rng rng(41);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Vector3d v(u(rng), u(rng), u(rng));
    Eigen::Vector3d x(u(rng), u(rng), u(rng));
    CHECK((skew(v) * x - v.cross(x)).norm() < 1e-14);
  }
  CHECK((skew({1, 0, 0}) * Eigen::Vector3d(0, 1, 0) -
         Eigen::Vector3d(0, 0, 1))
            .norm() < 1e-15);
}

TEST_CASE("angular matrix applies a symmetric inertia to a vector") {
  Rng rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Matrix3d S;
    for (int i = 0; i < 9; ++i) S(i / 3, i % 3) = u(rng);
    const Eigen::Matrix3d I = 0.5 * (S + S.transpose());
    Eigen::Matrix<double, 6, 1> vecI;
    vecI << I(0, 0), I(0, 1), I(0, 2), I(1, 1), I(1, 2), I(2, 2);
    const Eigen::Vector3d w(u(rng), u(rng), u(rng));
    CHECK((angular_matrix(w) * vecI - I * w).norm() < 1e-13);
  }
}

TEST_CASE("inertial params vector round-trip and inertia matrix symmetry") {
  Rng rng(43);
  const InertialParams p = random_params(rng);
  const InertialParams q = InertialParams::FromVector(p.vector());
  CHECK((q.vector() - p.vector()).norm() < 1e-15);
  const Eigen::Matrix3d I = p.inertiaMatrix();
  CHECK((I - I.transpose()).norm() == 0.0);
  CHECK(I(0, 0) == p.inertia[0]);
  CHECK(I(0, 1) == p.inertia[1]);
  CHECK(I(1, 2) == p.inertia[4]);
}

TEST_CASE("static regressor reproduces gravity loading in closed form") {
  // Body of 2 kg with com at (0.2, 0, 0), sensor frame aligned with the
  // world: f = (0, 0, -m g) reaction seen as weight, tau = c x g.
  SensorKinematics kin;
  kin.linear_acceleration = -kGravity;  // at rest, a_s = -g
  kin.angular_velocity.setZero();
  kin.angular_acceleration.setZero();
  kin.linear_velocity.setZero();
  kin.world_pose = Pose{};

  InertialParams p;
  p.mass = 2.0;
  p.first_moment = p.mass * Eigen::Vector3d(0.2, 0.0, 0.0);
  const Wrench w = predicted_wrench(kin, p);
  CHECK(w.force.x() == doctest::Approx(0.0));
  CHECK(w.force.y() == doctest::Approx(0.0));
  CHECK(w.force.z() == doctest::Approx(19.6133));
  CHECK(w.torque.x() == doctest::Approx(0.0));
  CHECK(w.torque.y() == doctest::Approx(-3.92266));
  CHECK(w.torque.z() == doctest::Approx(0.0));

  // Same numbers scaled to the worked example with m = 1, c = (0.2, 0, 0)/2.
  InertialParams q;
  q.mass = 2.0;
  q.first_moment = Eigen::Vector3d(0.2, 0.0, 0.0);
  const Wrench w2 = predicted_wrench(kin, q);
  CHECK(w2.force.z() == doctest::Approx(19.6133));
  CHECK(w2.torque.y() == doctest::Approx(-1.96133));
}

TEST_CASE("offsets pass straight through the augmented regressor") {
  SensorKinematics kin;
  kin.linear_acceleration = -kGravity;
  kin.angular_velocity.setZero();
  kin.angular_acceleration.setZero();
  kin.linear_velocity.setZero();
  kin.world_pose = Pose{};

  InertialParams p;
  p.force_offset = {1.0, -2.0, 3.0};
  p.torque_offset = {0.1, 0.2, -0.3};
  const Wrench w = predicted_wrench(kin, p);
  CHECK((w.force - p.force_offset).norm() < 1e-14);
  CHECK((w.torque - p.torque_offset).norm() < 1e-14);

  const Eigen::Matrix<double, 6, 16> A = augmented_regressor(kin);
  CHECK((A.leftCols<6>() - Eigen::Matrix<double, 6, 6>::Identity()).norm() <
        1e-15);
  CHECK((A.rightCols<10>() - regressor(kin)).norm() < 1e-15);
}

TEST_CASE("regressor matches a direct Newton-Euler evaluation") {
  const ManipulatorModel m = reference_manipulator();
  Rng rng(44);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    JointState st = JointState::Zero(m.dof());
    for (int j = 0; j < m.dof(); ++j) {
      st.q[j] = m.joints[j].midpoint() + 0.4 * m.joints[j].range() * u(rng) * 0.5;
      st.qd[j] = 2.0 * u(rng);
      st.qdd[j] = 5.0 * u(rng);
    }
    const SensorKinematics kin = sensor_kinematics(m, st, kGravity);
    const InertialParams p = random_params(rng);

    // Independent oracle: body dynamics written out directly.
    const Eigen::Vector3d& a = kin.linear_acceleration;
    const Eigen::Vector3d& w = kin.angular_velocity;
    const Eigen::Vector3d& dw = kin.angular_acceleration;
    const Eigen::Matrix3d I = p.inertiaMatrix();
    const Eigen::Vector3d f =
        p.force_offset + p.mass * a + dw.cross(p.first_moment) +
        w.cross(w.cross(p.first_moment));
    const Eigen::Vector3d tau = p.torque_offset + p.first_moment.cross(a) +
                                I * dw + w.cross(I * w);

    const Wrench pred = predicted_wrench(kin, p);
    CHECK((pred.force - f).norm() < 1e-10 * std::max(1.0, f.norm()));
    CHECK((pred.torque - tau).norm() < 1e-10 * std::max(1.0, tau.norm()));
  }
}

TEST_CASE("noiseless recovery of random parameters is near exact") {
  const ManipulatorModel m = reference_manipulator();
  Rng rng(45);
  for (int trial = 0; trial < 5; ++trial) {
    const InertialParams truth = random_params(rng);
    const auto samples = synthesize_samples(m, truth, 400, rng, true);
    auto [est, report] = estimate_parameters(samples, m);
    const double rel = (est.vector() - truth.vector()).norm() /
                       truth.vector().norm();
    CHECK(rel < 1e-8);
    CHECK(report.residual_rms < 1e-8);
    CHECK(report.rank == 16);
    CHECK(report.mass_physical);
  }
}

TEST_CASE("a pure offset measurement identifies exactly as offsets") {
  const ManipulatorModel m = reference_manipulator();
  Rng rng(46);
  InertialParams truth;
  truth.force_offset = {2.5, -1.0, 0.75};
  truth.torque_offset = {0.05, 0.1, -0.02};
  const auto samples = synthesize_samples(m, truth, 400, rng, true);
  auto [est, report] = estimate_parameters(samples, m);
  CHECK((est.force_offset - truth.force_offset).norm() < 1e-9);
  CHECK((est.torque_offset - truth.torque_offset).norm() < 1e-9);
  CHECK(std::abs(est.mass) < 1e-9);
  CHECK(est.first_moment.norm() < 1e-9);
  CHECK(est.inertia.norm() < 1e-9);
}

TEST_CASE("static data alone raises a rank deficiency error") {
  const ManipulatorModel m = reference_manipulator();
  Rng rng(47);
  const InertialParams truth = random_params(rng);
  const auto samples = synthesize_samples(m, truth, 50, rng, false);
  CHECK_THROWS_AS((void)estimate_parameters(samples, m), RankDeficiencyError);
  try {
    (void)estimate_parameters(samples, m);
  } catch (const RankDeficiencyError& e) {
    CHECK(e.deficiency > 0);
  }
}

TEST_CASE("external wrench is zero for a perfectly modeled free motion") {
  const ManipulatorModel m = reference_manipulator();
  Rng rng(48);
  const InertialParams p = random_params(rng);
  JointState st = JointState::Zero(m.dof());
  for (int j = 0; j < m.dof(); ++j) {
    st.q[j] = m.joints[j].midpoint() + 0.2;
    st.qd[j] = 0.5;
    st.qdd[j] = 1.0;
  }
  const SensorKinematics kin = sensor_kinematics(m, st, kGravity);
  const Wrench measured = predicted_wrench(kin, p);
  const Wrench ext = external_wrench(measured, kin, p);
  CHECK(ext.force.norm() < 1e-10);
  CHECK(ext.torque.norm() < 1e-10);
}

TEST_CASE("external wrench is additive in the applied load") {
  const ManipulatorModel m = reference_manipulator();
  Rng rng(49);
  const InertialParams p = random_params(rng);
  JointState st = JointState::Zero(m.dof());
  for (int j = 0; j < m.dof(); ++j) st.q[j] = m.joints[j].midpoint();
  const SensorKinematics kin = sensor_kinematics(m, st, kGravity);
  Wrench measured = predicted_wrench(kin, p);
  const Eigen::Vector3d f_app(3.0, -1.0, 7.5);
  const Eigen::Vector3d t_app(0.2, 0.0, -0.4);
  measured.force += f_app;
  measured.torque += t_app;
  const Wrench ext = external_wrench(measured, kin, p);
  CHECK((ext.force - f_app).norm() < 1e-12);
  CHECK((ext.torque - t_app).norm() < 1e-12);
}

TEST_CASE("zero-mean sensor noise averages out of the external wrench") {
  const ManipulatorModel m = reference_manipulator();
  Rng rng(50);
  const InertialParams p = random_params(rng);
  JointState st = JointState::Zero(m.dof());
  for (int j = 0; j < m.dof(); ++j) st.q[j] = m.joints[j].midpoint();
  const SensorKinematics kin = sensor_kinematics(m, st, kGravity);
  const Wrench clean = predicted_wrench(kin, p);

  const double sigma = 0.2;
  std::normal_distribution<double> noise(0.0, sigma);
  const int n = 1000;
  Eigen::Vector3d mean_f = Eigen::Vector3d::Zero();
  for (int k = 0; k < n; ++k) {
    Wrench noisy = clean;
    for (int i = 0; i < 3; ++i) noisy.force[i] += noise(rng);
    mean_f += external_wrench(noisy, kin, p).force;
  }
  mean_f /= n;
  // Sample mean of n iid draws stays within 3 sigma / sqrt(n) per axis.
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(mean_f[i]) < 3.0 * sigma / std::sqrt(double(n)));
}

TEST_SUITE_END();
