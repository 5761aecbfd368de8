#include "bimanip/force_control.hpp"

#include "doctest.h"

using namespace bimanip;

TEST_SUITE_BEGIN("force_control");

TEST_CASE("zero force error produces zero correction") {
  ForceControllerState c;
  c.kv = {1e-4, 1e-4, 1e-4};
  for (int k = 0; k < 10; ++k) {
    const Eigen::Vector3d out =
        compensator_step(c, {1.0, 2.0, 3.0}, {1.0, 2.0, 3.0});
    CHECK(out.norm() == 0.0);
  }
}

TEST_CASE("pure proportional gain scales the force error") {
  ForceControllerState c;
  c.kp.setConstant(1e-3);
  c.kv.setZero();
  const Eigen::Vector3d out =
      compensator_step(c, Eigen::Vector3d::Zero(), {0.0, 0.0, 10.0});
  // f_e = f_r - f_s = (0, 0, -10), x_f = kp * f_e.
  CHECK(out.x() == doctest::Approx(0.0));
  CHECK(out.y() == doctest::Approx(0.0));
  CHECK(out.z() == doctest::Approx(-0.01));
}

TEST_CASE("first step uses no derivative and the filter then decays") {
  ForceControllerState c;
  c.kp.setZero();
  c.kv.setConstant(1.0);
  // Step change in the error: first call sees no derivative at all.
  Eigen::Vector3d out = compensator_step(c, {0, 0, 5.0}, Eigen::Vector3d::Zero());
  CHECK(out.norm() == 0.0);
  // Constant error afterwards: the filtered derivative must decay toward 0.
  double prev = 1e9;
  for (int k = 0; k < 50; ++k) {
    out = compensator_step(c, {0, 0, 5.0}, Eigen::Vector3d::Zero());
    CHECK(std::abs(out.z()) <= prev + 1e-15);
    prev = std::abs(out.z());
  }
  CHECK(prev < 1e-6);
}

TEST_CASE("environment force is a one-sided linear spring") {
  ContactEnvironment env;
  env.stiffness = 1e4;
  CHECK(environment_force(env, {0.0, 0.0, 0.5}).force.norm() == 0.0);
  CHECK(environment_force(env, {0.0, 0.0, 0.0}).force.norm() == 0.0);
  // 1 mm penetration at 1e4 N/m reads 10 N along +z.
  const Wrench w = environment_force(env, {0.3, -0.2, -1e-3});
  CHECK(w.force.x() == doctest::Approx(0.0));
  CHECK(w.force.y() == doctest::Approx(0.0));
  CHECK(w.force.z() == doctest::Approx(10.0));
  // Continuity across the surface.
  CHECK(environment_force(env, {0, 0, -1e-9}).force.z() ==
        doctest::Approx(0.0).epsilon(1e-4));
}

TEST_CASE("free space loop tracks the reference with zero correction") {
  ForceControllerState c;
  ContactEnvironment env;
  env.surface_height = [](const Eigen::Vector3d&) { return -10.0; };
  const auto x_r = [](double t) {
    return Eigen::Vector3d(0.1 * t, 0.0, 0.2);
  };
  const LoopTrace trace =
      simulate_contact_loop(c, env, x_r, Eigen::Vector3d::Zero(), 1.0);
  REQUIRE(!trace.steps.empty());
  for (const auto& s : trace.steps) {
    CHECK((s.x_c - s.x_r).norm() < 1e-12);
    CHECK(s.x_f.norm() < 1e-12);
    CHECK(s.f_s.norm() == 0.0);
  }
}

namespace {

LoopTrace press_loop(double k_env, double setpoint, double duration,
                     ForceControllerState& c) {
  ContactEnvironment env;
  env.stiffness = k_env;
  const auto x_r = [](double) { return Eigen::Vector3d(0.0, 0.0, 1e-3); };
  return simulate_contact_loop(c, env, x_r, {0.0, 0.0, -setpoint}, duration);
}

}  // namespace

TEST_CASE("pressing loop converges to the force setpoint") {
  for (double k_env : {1e3, 1e4, 1e5}) {
    CAPTURE(k_env);
    ForceControllerState c;
    // kp k_env must stay below 2 across the sweep for per-step stability.
    c.kp.setConstant(1e-5);
    const double setpoint = 10.0;
    const LoopTrace trace = press_loop(k_env, setpoint, 5.0, c);
    const auto& last = trace.steps.back();
    CHECK(last.f_e.norm() < 0.01 * setpoint);
    // Steady state sits at the spring fixed point: penetration F/k.
    const double penetration = -last.x_c.z();
    CHECK(penetration ==
          doctest::Approx(setpoint / k_env).epsilon(0.01));
  }
}

TEST_CASE("correction accumulates to reach the surface from above") {
  ForceControllerState c;
  c.kp.setConstant(1e-4);
  const LoopTrace trace = press_loop(1e4, 10.0, 5.0, c);
  const auto& last = trace.steps.back();
  // The reference hovers 1 mm above; the accumulated correction must carry
  // the tool through it into the surface.
  CHECK(last.x_f.z() < -1e-3);
  CHECK(last.f_s.z() == doctest::Approx(-10.0).epsilon(0.01));
}

TEST_CASE("unstable gain trips the divergence guard") {
  ForceControllerState c;
  c.kp.setConstant(1.0);  // kp * k_env >> 2, guaranteed oscillation growth
  CHECK_THROWS_AS(press_loop(1e5, 10.0, 5.0, c), ForceLoopError);
}

TEST_CASE("guarded move stops at the requested contact force") {
  ContactEnvironment env;
  env.stiffness = 2e4;
  const GuardedMoveResult r = guarded_move(env, {0.0, 0.0, 0.05},
                                           {0.0, 0.0, -1.0}, 0.02, 4.0, 0.2);
  const double penetration = -r.contact_position.z();
  CHECK(penetration > 0.0);
  // Stop fires on the first sample at or past stop_force; one step of
  // overshoot at this speed and dt is 2e-5 m, i.e. 0.4 N.
  CHECK(penetration == doctest::Approx(4.0 / 2e4).epsilon(0.15));
  const double f_end = env.stiffness * penetration;
  CHECK(f_end >= 4.0);
  CHECK(f_end <= 4.5);
}

TEST_CASE("guarded move without a surface reports a travel error") {
  ContactEnvironment env;
  env.surface_height = [](const Eigen::Vector3d&) { return -1.0; };
  CHECK_THROWS_AS(guarded_move(env, {0.0, 0.0, 0.05}, {0.0, 0.0, -1.0}, 0.05,
                               4.0, 0.3),
                  ForceLoopError);
}

TEST_SUITE_END();
