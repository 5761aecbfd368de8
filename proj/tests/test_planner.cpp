#include "bimanip/planner.hpp"

#include "doctest.h"

using namespace bimanip;

namespace {

double path_length(const JointPath& path) {
  double len = 0.0;
  for (std::size_t i = 1; i < path.waypoints.size(); ++i)
    len += (path.waypoints[i] - path.waypoints[i - 1]).norm();
  return len;
}

Eigen::VectorXd mid_config(const ManipulatorModel& m) {
  Eigen::VectorXd q(m.dof());
  for (int j = 0; j < m.dof(); ++j) q[j] = m.joints[j].midpoint();
  return q;
}

bool path_valid_at(const CollisionScene& scene, const JointPath& path,
                   double resolution) {
  for (std::size_t i = 1; i < path.waypoints.size(); ++i)
    if (!edge_valid(scene, path.waypoints[i - 1], path.waypoints[i],
                    resolution))
      return false;
  return !path.waypoints.empty() &&
         !collides(scene, path.waypoints.front()) &&
         !collides(scene, path.waypoints.back());
}

}  // namespace

TEST_SUITE_BEGIN("planner");

TEST_CASE("segment distance oracles") {
  // Parallel unit segments one apart.
  CHECK(segment_segment_distance({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}) ==
        doctest::Approx(1.0));
  // Crossing segments at height offset.
  CHECK(segment_segment_distance({-1, 0, 0}, {1, 0, 0}, {0, -1, 0.5},
                                 {0, 1, 0.5}) == doctest::Approx(0.5));
  // Closest pair at the endpoints.
  CHECK(segment_segment_distance({0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}) ==
        doctest::Approx(1.0));
  // Degenerate point-point case.
  CHECK(segment_segment_distance({0, 0, 0}, {0, 0, 0}, {0, 3, 4}, {0, 3, 4}) ==
        doctest::Approx(5.0));
}

TEST_CASE("segment to box distance") {
  CollisionBox box;
  box.half_extents = {0.5, 0.5, 0.5};
  // Segment well above the box.
  CHECK(segment_box_distance({-1, 0, 1.5}, {1, 0, 1.5}, box) ==
        doctest::Approx(1.0).epsilon(1e-3));
  // Segment through the box has zero distance.
  CHECK(segment_box_distance({-1, 0, 0}, {1, 0, 0}, box) ==
        doctest::Approx(0.0));
  // Off-corner segment.
  CHECK(segment_box_distance({2, 2, 0}, {2, 2, 1}, box) ==
        doctest::Approx(std::sqrt(2.0) * 1.5).epsilon(1e-3));
}

TEST_CASE("free space is collision free and a table plane is not") {
  const ManipulatorModel m = reference_manipulator();
  CollisionScene scene;
  scene.robot = &m;
  const Eigen::VectorXd q = mid_config(m);
  CHECK(!collides(scene, q));

  // A slab at shoulder height must intersect the arm.
  CollisionBox slab;
  slab.pose.position = {0.0, 0.0, 0.35};
  slab.half_extents = {2.0, 2.0, 0.01};
  scene.boxes.push_back(slab);
  CHECK(collides(scene, q));
}

TEST_CASE("exact tangency counts as a collision") {
  CollisionScene scene;
  const ManipulatorModel m = reference_manipulator();
  scene.robot = &m;
  // Static capsule exactly link_radius away from the first link's axis.
  Capsule c;
  c.a = {2.0 * scene.link_radius, 0.0, 0.0};
  c.b = {2.0 * scene.link_radius, 0.0, 0.3};
  c.radius = scene.link_radius;
  scene.capsules.push_back(c);
  CHECK(collides(scene, mid_config(m)));
}

TEST_CASE("start equal to goal returns a single waypoint") {
  const ManipulatorModel m = reference_manipulator();
  CollisionScene scene;
  scene.robot = &m;
  const Eigen::VectorXd q = mid_config(m);
  const JointPath path = rrt_connect(scene, q, q, {}, 1);
  REQUIRE(path.waypoints.size() == 1);
  CHECK((path.waypoints[0] - q).norm() == 0.0);
}

TEST_CASE("an unobstructed query smooths to near the straight line") {
  const ManipulatorModel m = reference_manipulator();
  CollisionScene scene;
  scene.robot = &m;
  const Eigen::VectorXd start = mid_config(m);
  Eigen::VectorXd goal = start;
  goal[0] += 1.0;
  goal[2] += 0.5;
  const JointPath path = rrt_connect(scene, start, goal, {}, 2);
  REQUIRE(path.waypoints.size() >= 2);
  CHECK((path.waypoints.front() - start).norm() < 1e-12);
  CHECK((path.waypoints.back() - goal).norm() < 1e-12);
  CHECK(path_length(path) <= 1.2 * (goal - start).norm());
}

TEST_CASE("a start inside an obstacle fails within the budget") {
  const ManipulatorModel m = reference_manipulator();
  CollisionScene scene;
  scene.robot = &m;
  CollisionBox cage;
  cage.pose.position = {0.0, 0.0, 0.4};
  cage.half_extents = {2.0, 2.0, 2.0};
  scene.boxes.push_back(cage);
  Eigen::VectorXd start = mid_config(m);
  Eigen::VectorXd goal = start;
  goal[0] += 0.5;
  PlannerParams params;
  params.max_iterations = 2000;
  CHECK_THROWS_AS(rrt_connect(scene, start, goal, params, 3), PlanningError);
}

TEST_CASE("planned paths revalidate at twice the resolution") {
  const ManipulatorModel m = reference_manipulator();
  Rng rng(61);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int planned = 0;
  for (int scene_idx = 0; scene_idx < 20; ++scene_idx) {
    CollisionScene scene;
    scene.robot = &m;
    // Random small boxes away from the base pillar.
    const int n_boxes = 1 + scene_idx % 3;
    for (int b = 0; b < n_boxes; ++b) {
      CollisionBox box;
      box.pose.position = {0.55 + 0.2 * u(rng), 0.55 + 0.2 * u(rng),
                           0.35 + 0.2 * u(rng)};
      box.half_extents = {0.08, 0.08, 0.08};
      scene.boxes.push_back(box);
    }
    Eigen::VectorXd start = mid_config(m);
    Eigen::VectorXd goal = start;
    goal[0] += 0.8 + 0.3 * u(rng);
    goal[1] += 0.3 * u(rng);
    goal[3] += 0.5 * u(rng);
    if (collides(scene, start) || collides(scene, goal)) continue;

    PlannerParams params;
    const JointPath path =
        rrt_connect(scene, start, goal, params, 100 + scene_idx);
    CHECK(path_valid_at(scene, path, params.edge_resolution / 2.0));
    ++planned;
  }
  CHECK(planned >= 15);
}

TEST_CASE("prioritized planning keeps both arms collision free") {
  const ManipulatorModel base = reference_manipulator();
  ManipulatorModel left = base;
  ManipulatorModel right = base;
  right.base_pose.position = {1.0, 0.0, 0.0};
  right.base_pose.orientation =
      Eigen::Quaterniond(Eigen::AngleAxisd(M_PI, Eigen::Vector3d::UnitZ()));

  std::vector<ArmPlanRequest> arms(2);
  arms[0].name = "left";
  arms[0].model = &left;
  arms[0].start = mid_config(left);
  arms[0].goal = arms[0].start;
  arms[0].goal[1] += 0.6;
  arms[1].name = "right";
  arms[1].model = &right;
  arms[1].start = mid_config(right);
  arms[1].goal = arms[1].start;
  arms[1].goal[1] -= 0.6;

  const auto paths = prioritized_plan(arms, {}, {}, {}, 11);
  REQUIRE(paths.size() == 2);

  // Replay arm 2's path against arm 1 frozen at its goal.
  CollisionScene scene;
  scene.robot = &right;
  scene.freezeArm(left, arms[0].goal);
  CHECK(path_valid_at(scene, paths[1], 0.01));
}

TEST_CASE("a blocked arm aborts with its name in the error") {
  const ManipulatorModel base = reference_manipulator();
  ManipulatorModel right = base;
  right.base_pose.position = {1.0, 0.0, 0.0};

  std::vector<ArmPlanRequest> arms(2);
  arms[0].name = "left";
  arms[0].model = &base;
  arms[0].start = mid_config(base);
  arms[0].goal = arms[0].start;
  arms[1].name = "right";
  arms[1].model = &right;
  arms[1].start = mid_config(right);
  arms[1].goal = arms[1].start;
  arms[1].goal[0] += 0.5;

  // Box the second arm in completely.
  CollisionBox cage;
  cage.pose.position = {1.0, 0.0, 0.4};
  cage.half_extents = {0.4, 0.9, 0.9};
  PlannerParams params;
  params.max_iterations = 2000;
  try {
    prioritized_plan(arms, {cage}, {}, params, 12);
    FAIL("expected PlanningError");
  } catch (const PlanningError& e) {
    CHECK(std::string(e.what()).find("right") != std::string::npos);
  }
}

TEST_SUITE_END();
