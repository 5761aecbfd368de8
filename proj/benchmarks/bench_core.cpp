#include "bimanip/identification.hpp"
#include "bimanip/kinematics.hpp"
#include "bimanip/workspace.hpp"

#include <benchmark/benchmark.h>

using namespace bimanip;

namespace {

Eigen::VectorXd random_config(const ManipulatorModel& m, Rng& rng) {
  Eigen::VectorXd q(m.dof());
  for (int j = 0; j < m.dof(); ++j) {
    std::uniform_real_distribution<double> d(m.joints[j].lower + 0.05,
                                             m.joints[j].upper - 0.05);
    q[j] = d(rng);
  }
  return q;
}

void BM_ForwardKinematics(benchmark::State& state) {
  const ManipulatorModel m = reference_manipulator();
  Rng rng(1);
  const Eigen::VectorXd q = random_config(m, rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(forward_kinematics(m, q, FkFrame::Sensor));
}
BENCHMARK(BM_ForwardKinematics);

void BM_Jacobian(benchmark::State& state) {
  const ManipulatorModel m = reference_manipulator();
  Rng rng(2);
  const Eigen::VectorXd q = random_config(m, rng);
  for (auto _ : state) benchmark::DoNotOptimize(jacobian(m, q));
}
BENCHMARK(BM_Jacobian);

void BM_ModifiedIndex(benchmark::State& state) {
  const ManipulatorModel m = reference_manipulator();
  Rng rng(3);
  const Eigen::VectorXd q = random_config(m, rng);
  for (auto _ : state) benchmark::DoNotOptimize(modified_index(m, q));
}
BENCHMARK(BM_ModifiedIndex);

void BM_InverseKinematics(benchmark::State& state) {
  const ManipulatorModel m = reference_manipulator();
  Pose target;
  target.position = {0.35, -0.15, 0.35};
  target.orientation =
      Eigen::Quaterniond(Eigen::AngleAxisd(M_PI, Eigen::Vector3d::UnitX()));
  Eigen::VectorXd seed = m.midConfiguration();
  seed[1] = 0.6;
  seed[2] = 1.2;
  seed[4] = 1.2;
  for (auto _ : state)
    benchmark::DoNotOptimize(inverse_kinematics(m, target, seed));
}
BENCHMARK(BM_InverseKinematics);

void BM_AugmentedRegressor(benchmark::State& state) {
  const ManipulatorModel m = reference_manipulator();
  Rng rng(4);
  JointState st = JointState::Zero(m.dof());
  st.q = random_config(m, rng);
  st.qd.setConstant(0.5);
  st.qdd.setConstant(1.0);
  const SensorKinematics kin =
      sensor_kinematics(m, st, {0.0, 0.0, -9.80665});
  for (auto _ : state) benchmark::DoNotOptimize(augmented_regressor(kin));
}
BENCHMARK(BM_AugmentedRegressor);

void BM_SensorKinematics(benchmark::State& state) {
  const ManipulatorModel m = reference_manipulator();
  Rng rng(5);
  JointState st = JointState::Zero(m.dof());
  st.q = random_config(m, rng);
  st.qd.setConstant(0.5);
  st.qdd.setConstant(1.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(sensor_kinematics(m, st, {0.0, 0.0, -9.80665}));
}
BENCHMARK(BM_SensorKinematics);

}  // namespace

BENCHMARK_MAIN();
