#include "bimanip/excitation.hpp"

#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace bimanip;

TEST_SUITE_BEGIN("excitation");

TEST_CASE("zero parameters give a constant trajectory at the offset") {
  ExcitationParams p = ExcitationParams::Zero(6, 3, 2.0 * M_PI * 0.1);
  p.offset.setConstant(0.3);
  for (double t : {0.0, 1.7, 5.0}) {
    const JointState s = eval_trajectory(p, t);
    CHECK(s.q.isApproxToConstant(0.3, 1e-15));
    CHECK(s.qd.isZero(0.0));
    CHECK(s.qdd.isZero(0.0));
  }
}

TEST_CASE("single harmonic with unit sine amplitude") {
  // a1 = 1, b1 = 0, w_f = 1: qd(0) = 1, qdd(0) = 0, q(0) = q0 - 0 = q0... the
  // sine series contributes nothing at t = 0, so q(0) = q0.
  ExcitationParams p = ExcitationParams::Zero(1, 1, 1.0);
  p.a(0, 0) = 1.0;
  const JointState s0 = eval_trajectory(p, 0.0);
  CHECK(s0.q[0] == doctest::Approx(0.0));
  CHECK(s0.qd[0] == doctest::Approx(1.0));
  CHECK(s0.qdd[0] == doctest::Approx(0.0));
  // Quarter period: q = sin(pi/2) = 1, qd = cos(pi/2) = 0, qdd = -1.
  const JointState sq = eval_trajectory(p, M_PI / 2.0);
  CHECK(sq.q[0] == doctest::Approx(1.0));
  CHECK(sq.qd[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sq.qdd[0] == doctest::Approx(-1.0));
}

TEST_CASE("trajectory is periodic to machine precision") {
  const ManipulatorModel m = reference_manipulator();
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const ExcitationParams p = random_feasible_params(m, 5, 2.0 * M_PI * 0.1, rng);
    const double T = p.period();
    std::uniform_real_distribution<double> ts(0.0, T);
    for (int k = 0; k < 20; ++k) {
      const double t = ts(rng);
      const JointState s0 = eval_trajectory(p, t);
      const JointState s1 = eval_trajectory(p, t + T);
      CHECK((s0.q - s1.q).lpNorm<Eigen::Infinity>() < 1e-10);
      CHECK((s0.qd - s1.qd).lpNorm<Eigen::Infinity>() < 1e-10);
      CHECK((s0.qdd - s1.qdd).lpNorm<Eigen::Infinity>() < 1e-10);
    }
  }
}

TEST_CASE("analytic derivatives match finite differences") {
  const ManipulatorModel m = reference_manipulator();
  Rng rng(32);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const ExcitationParams p = random_feasible_params(m, 4, 2.0 * M_PI * 0.1, rng);
    std::uniform_real_distribution<double> ts(0.0, p.period());
    const double t = ts(rng);
    const JointState sm = eval_trajectory(p, t - h);
    const JointState s0 = eval_trajectory(p, t);
    const JointState sp = eval_trajectory(p, t + h);
    const Eigen::VectorXd qd_fd = (sp.q - sm.q) / (2.0 * h);
    const Eigen::VectorXd qdd_fd = (sp.qd - sm.qd) / (2.0 * h);
    CHECK((qd_fd - s0.qd).lpNorm<Eigen::Infinity>() < 1e-5);
    CHECK((qdd_fd - s0.qdd).lpNorm<Eigen::Infinity>() < 1e-5);
  }
}

TEST_CASE("constraint check passes feasible draws and reports violations") {
  const ManipulatorModel m = reference_manipulator();
  Rng rng(33);
  ExcitationParams p = random_feasible_params(m, 3, 2.0 * M_PI * 0.1, rng);
  ConstraintReport rep = check_constraints(p, m);
  CHECK(rep.pass);
  REQUIRE(rep.joints.size() == 6);
  for (const auto& j : rep.joints) {
    CHECK(j.pass);
    CHECK(j.max_velocity <= j.velocity_limit);
    CHECK(j.max_acceleration <= j.acceleration_limit);
    CHECK(j.max_position_excursion <= j.position_allowance);
  }

  // Push one joint's first harmonic to twice its velocity limit; the report
  // must flag it and measure a peak near that amplitude.
  ExcitationParams bad = ExcitationParams::Zero(6, 1, 2.0 * M_PI * 0.1);
  const double vmax = m.joints[2].velocity_limit;
  bad.a(2, 0) = 2.0 * vmax;
  for (int j = 0; j < 6; ++j) bad.offset[j] = m.joints[j].midpoint();
  rep = check_constraints(bad, m);
  CHECK(!rep.pass);
  CHECK(!rep.joints[2].pass);
  CHECK(rep.joints[2].max_velocity == doctest::Approx(2.0 * vmax).epsilon(1e-3));
}

TEST_CASE("constraint peaks are stable under grid refinement") {
  const ManipulatorModel m = reference_manipulator();
  Rng rng(34);
  const ExcitationParams p = random_feasible_params(m, 4, 2.0 * M_PI * 0.1, rng);
  const ConstraintReport coarse = check_constraints(p, m, 1000);
  const ConstraintReport fine = check_constraints(p, m, 4000);
  for (std::size_t j = 0; j < coarse.joints.size(); ++j) {
    CHECK(fine.joints[j].max_velocity ==
          doctest::Approx(coarse.joints[j].max_velocity).epsilon(1e-3));
    CHECK(fine.joints[j].max_acceleration ==
          doctest::Approx(coarse.joints[j].max_acceleration).epsilon(1e-3));
  }
}

TEST_CASE("information matrix is symmetric, PSD, and additive over samples") {
  const ManipulatorModel m = reference_manipulator();
  Rng rng(35);
  const ExcitationParams p = random_feasible_params(m, 3, 2.0 * M_PI * 0.1, rng);
  const std::vector<double> t1 = {0.1, 0.7, 1.9};
  const std::vector<double> t2 = {2.5, 4.0, 6.3, 8.8};
  std::vector<double> both = t1;
  both.insert(both.end(), t2.begin(), t2.end());

  const Eigen::MatrixXd g1 = information_matrix(p, m, t1);
  const Eigen::MatrixXd g2 = information_matrix(p, m, t2);
  const Eigen::MatrixXd gb = information_matrix(p, m, both);
  REQUIRE(g1.rows() == 16);
  REQUIRE(g1.cols() == 16);
  CHECK((g1 - g1.transpose()).norm() < 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g1);
  CHECK(es.eigenvalues().minCoeff() > -1e-9);
  CHECK((gb - g1 - g2).norm() < 1e-8 * gb.norm());
}

TEST_CASE("a static trajectory cannot excite all sixteen parameters") {
  const ManipulatorModel m = reference_manipulator();
  ExcitationParams still = ExcitationParams::Zero(6, 1, 2.0 * M_PI * 0.1);
  for (int j = 0; j < 6; ++j) still.offset[j] = m.joints[j].midpoint();
  std::vector<double> times;
  for (int k = 0; k < 50; ++k) times.push_back(0.2 * k);
  const Eigen::MatrixXd gamma = information_matrix(still, m, times);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gamma);
  lu.setThreshold(1e-8);
  CHECK(lu.rank() < 16);
}

TEST_CASE("optimizer returns a feasible trajectory even on a budget of one") {
  const ManipulatorModel m = reference_manipulator();
  ExcitationOptimizerConfig cfg;
  cfg.multistarts = 1;
  cfg.pattern_iterations = 0;
  const ExcitationParams p = optimize_excitation(m, 2, 2.0 * M_PI * 0.1, 1, 3, cfg);
  CHECK(check_constraints(p, m).pass);
  CHECK(std::isfinite(log_det_information(p, m)));
}

TEST_CASE("optimizer is deterministic per seed") {
  const ManipulatorModel m = reference_manipulator();
  ExcitationOptimizerConfig cfg;
  cfg.multistarts = 3;
  cfg.pattern_iterations = 5;
  const ExcitationParams p1 = optimize_excitation(m, 2, 2.0 * M_PI * 0.1, 10, 42, cfg);
  const ExcitationParams p2 = optimize_excitation(m, 2, 2.0 * M_PI * 0.1, 10, 42, cfg);
  CHECK(p1.a == p2.a);
  CHECK(p1.b == p2.b);
  CHECK(p1.offset == p2.offset);
}

TEST_CASE("parameter save and load round-trip exactly") {
  const ManipulatorModel m = reference_manipulator();
  Rng rng(36);
  const ExcitationParams p = random_feasible_params(m, 3, 2.0 * M_PI * 0.1, rng);
  const std::string path = "/tmp/bimanip_test_excitation.json";
  save_excitation_params(p, path);
  const ExcitationParams q = load_excitation_params(path);
  std::remove(path.c_str());
  CHECK(q.dof() == p.dof());
  CHECK(q.harmonics() == p.harmonics());
  CHECK((q.a - p.a).norm() < 1e-12);
  CHECK((q.b - p.b).norm() < 1e-12);
  CHECK((q.offset - p.offset).norm() < 1e-12);
  CHECK(q.base_frequency == doctest::Approx(p.base_frequency));
}

TEST_CASE("trajectory CSV has the expected shape") {
  ExcitationParams p = ExcitationParams::Zero(2, 1, 1.0);
  p.a(0, 0) = 0.5;
  std::ostringstream out;
  export_trajectory_csv(p, out, 10);
  std::istringstream in(out.str());
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (rows == 0) CHECK(line.rfind("t,", 0) == 0);
    ++rows;
  }
  CHECK(rows == 12);  // header + samples, both period endpoints included
}

TEST_SUITE_END();
