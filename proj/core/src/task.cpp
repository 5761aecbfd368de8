#include "bimanip/task.hpp"

#include "bimanip/kinematics.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>

namespace bimanip {

using nlohmann::json;

double precision_index(double hole_diameter, double peg_diameter) {
  if (peg_diameter < 0.0 || peg_diameter >= hole_diameter)
    throw std::domain_error("precision_index: need 0 <= d_P < d_H");
  return std::log2(hole_diameter / (hole_diameter - peg_diameter));
}

void Scenario::validate() const {
  if (hole_diameter <= 2.0 * pin_radius)
    throw ConfigError("scenario: hole diameter must exceed pin diameter");
  if (pin_radius <= 0.0 || pin_length <= 0.0)
    throw ConfigError("scenario: pin dimensions must be positive");
  if (arm_distance <= 0.0)
    throw ConfigError("scenario: arm distance must be positive");
  if (contact_stiffness <= 0.0)
    throw ConfigError("scenario: contact stiffness must be positive");
}

Scenario default_scenario() {
  Scenario s;
  s.pin_start.position = {0.45, -0.15, s.table_top + 0.5 * s.pin_length};
  s.stick_start.position = {0.55, -0.15, s.table_top + 0.5 * s.stick_extents.z()};
  s.stick_insertion_pose.position = {0.50, -0.18, s.table_top + 0.15};
  s.noise.position_bound = 1.5e-3;
  s.noise.orientation_bound = 0.02;
  return s;
}

// ------------------------------------------------------------- task run

namespace {

const Eigen::Quaterniond kToolDown{Eigen::AngleAxisd(M_PI,
                                                     Eigen::Vector3d::UnitX())};

Pose tool_pose_for_tip(const Eigen::Vector3d& tip, double tip_drop,
                       const Eigen::Quaterniond& orientation = kToolDown) {
  Pose p;
  p.position = tip + Eigen::Vector3d(0.0, 0.0, tip_drop);
  p.orientation = orientation;
  return p;
}

double yaw_of(const Eigen::Quaterniond& q) {
  const Eigen::Matrix3d R = q.toRotationMatrix();
  return std::atan2(R(1, 0), R(0, 0));
}

void refresh_context(TaskRun& run) {
  run.ctx.models = {{"left", &run.left_model}, {"right", &run.right_model}};
  run.ctx.check_reachability = run.scenario.check_reachability;
}

}  // namespace

Eigen::Vector3d TaskRun::true_hole_center() const {
  const SceneObject& stick = world.objects.at("stick").object;
  return stick.pose.apply(
      {0.0, 0.0, 0.5 * scenario.stick_extents.z()});
}

Pose TaskRun::perceive(const Pose& true_pose) {
  Pose p = perturb_pose(true_pose, scenario.noise, rng);
  // Tabletop contact geometry is 2.5D: keep only the yaw component of the
  // orientation error.
  const Eigen::Quaterniond err =
      p.orientation * true_pose.orientation.conjugate();
  Eigen::AngleAxisd aa(err);
  const double yaw_err = aa.angle() * aa.axis().z();
  p.orientation =
      Eigen::Quaterniond(Eigen::AngleAxisd(yaw_err, Eigen::Vector3d::UnitZ())) *
      true_pose.orientation;
  return p;
}

TaskRun make_task_run(const Scenario& scenario) {
  scenario.validate();
  TaskRun run;
  run.scenario = scenario;
  run.rng.seed(scenario.seed);

  run.left_model = reference_manipulator();
  run.left_model.name = "left";
  run.right_model = reference_manipulator();
  run.right_model.name = "right";
  run.right_model.base_pose.position = {scenario.arm_distance, 0.0, 0.0};
  run.right_model.base_pose.orientation =
      Eigen::Quaterniond(Eigen::AngleAxisd(M_PI, Eigen::Vector3d::UnitZ()));

  auto make_arm = [&](const ManipulatorModel& model,
                      const Eigen::Vector3d& home_tip) {
    ArmState a;
    a.tip_drop = scenario.finger_length;
    a.tool = tool_pose_for_tip(home_tip, a.tip_drop);
    // Elbow-down ready posture; the straight mid configuration is a poor
    // IK seed for downward-facing tool targets.
    a.joints = model.midConfiguration();
    a.joints[1] = 0.6;
    a.joints[2] = 1.2;
    a.joints[4] = 1.2;
    a.gripper_opening = model.gripper.max_opening;
    if (scenario.check_reachability) {
      try {
        a.joints = inverse_kinematics(model, a.tool, a.joints);
      } catch (const IkError&) {
        throw ConfigError("scenario: home pose unreachable for " + model.name);
      }
    }
    return a;
  };
  run.world.arms["left"] =
      make_arm(run.left_model, {0.35, -0.15, scenario.table_top + 0.20});
  run.world.arms["right"] =
      make_arm(run.right_model,
               {scenario.arm_distance - 0.35, -0.15, scenario.table_top + 0.20});

  SceneObject pin;
  pin.kind = SceneObject::Kind::Pin;
  pin.name = "pin";
  pin.cylinder_radius = scenario.pin_radius;
  pin.cylinder_length = scenario.pin_length;
  pin.pose = scenario.pin_start;
  SceneObject stick;
  stick.kind = SceneObject::Kind::Stick;
  stick.name = "stick";
  stick.box_extents = scenario.stick_extents;
  stick.pose = scenario.stick_start;
  stick.holes.push_back({{0.0, 0.0, 0.5 * scenario.stick_extents.z()},
                         scenario.hole_diameter,
                         scenario.hole_depth});

  run.world.objects["pin"] = {pin, run.perceive(pin.pose)};
  run.world.objects["stick"] = {stick, run.perceive(stick.pose)};

  run.ctx.dt = 1e-3;
  run.ctx.kp = Eigen::Vector3d::Constant(scenario.kp);
  run.ctx.kv = Eigen::Vector3d::Constant(scenario.kv);
  run.ctx.contact_stiffness = scenario.contact_stiffness;

  // Contact surface model from the true world state. The pin, when held by
  // the left arm, can rest on the stick, tip into the hole, insert fully
  // (up to the gripper touching the stick), or fall to the table.
  const double table = scenario.table_top;
  const Eigen::Vector3d ext = scenario.stick_extents;
  const double engage_r = scenario.engageRadius();
  const double catch_r = scenario.catchRadius();
  const double partial = scenario.partial_drop;
  const double cap = std::min(scenario.hole_depth,
                              run.left_model.gripper.open_close_height_delta);
  run.ctx.surface_height = [table, ext, engage_r, catch_r, partial, cap](
                               const WorldState& world, const std::string& arm,
                               const Eigen::Vector3d& tip) {
    auto holder = world.attachments.find("pin");
    const bool pin_in_hand =
        holder != world.attachments.end() && holder->second == arm;
    if (!pin_in_hand) return table;
    const SceneObject& stick = world.objects.at("stick").object;
    const double top = stick.pose.position.z() + 0.5 * ext.z();
    const Eigen::Quaterniond rot = stick.pose.orientation;
    Eigen::Vector3d local = rot.conjugate() * (tip - stick.pose.position);
    if (std::abs(local.x()) > 0.5 * ext.x() ||
        std::abs(local.y()) > 0.5 * ext.y())
      return table;
    const double hole_dist = local.head<2>().norm();
    if (hole_dist <= engage_r) return top - cap;
    if (hole_dist <= catch_r) return top - partial;
    return top;
  };

  refresh_context(run);
  return run;
}

// ------------------------------------------------------------ sub-tasks

void run_compliant_grasp(TaskRun& run) {
  refresh_context(run);
  WorldState& world = run.world;
  SimContext& ctx = run.ctx;
  const Scenario& sc = run.scenario;
  ArmState& arm = world.arms.at("left");

  Pose pin_perceived = world.objects.at("pin").perceived_pose;
  pin_perceived.position.z() += sc.pin_z_offset;
  const double perceived_bottom =
      pin_perceived.position.z() - 0.5 * sc.pin_length;
  const Eigen::Vector3d pregrasp{pin_perceived.position.x(),
                                 pin_perceived.position.y(),
                                 perceived_bottom + sc.pin_length + 0.02};
  executor_approach(world, ctx, "left",
                    tool_pose_for_tip(pregrasp, arm.tip_drop), prim::kApproach,
                    "approach to the pregrasp position");

  if (sc.compliant_grasp) {
    executor_contact_no_motion(world, ctx, "left", sc.contact_force, false,
                               prim::kContactGripper);
    executor_contact_no_motion(world, ctx, "left", sc.contact_force, true,
                               prim::kContactGripper);
  } else {
    // Direct grasp at the perceived height, no contact feedback.
    const Eigen::Vector3d grasp_tip{pin_perceived.position.x(),
                                    pin_perceived.position.y(),
                                    perceived_bottom};
    executor_approach(world, ctx, "left",
                      tool_pose_for_tip(grasp_tip, arm.tip_drop),
                      prim::kApproach, "move to the grasp height");
  }

  executor_grasp(world, ctx, "left", "pin");

  // The pin hangs below the closed fingertips; the contact point becomes
  // the pin tip.
  const double pin_tip_z =
      world.objects.at("pin").object.pose.position.z() - 0.5 * sc.pin_length;
  arm.tip_drop = arm.tool.position.z() - pin_tip_z;

  Pose lift = arm.tool;
  lift.position.z() += 0.10;
  executor_transport(world, ctx, "left", lift, prim::kTransport,
                     "pick-up the pin from the table");
}

void run_pick_and_place(TaskRun& run) {
  refresh_context(run);
  WorldState& world = run.world;
  SimContext& ctx = run.ctx;
  const Scenario& sc = run.scenario;
  ArmState& arm = world.arms.at("right");

  const Pose stick_perceived = world.objects.at("stick").perceived_pose;
  const double yaw = yaw_of(stick_perceived.orientation);
  const Eigen::Quaterniond grasp_orient =
      Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ())) *
      kToolDown;
  const Eigen::Vector3d grasp_tip{
      stick_perceived.position.x(), stick_perceived.position.y(),
      stick_perceived.position.z()};  // mid-height of the stick
  executor_approach(world, ctx, "right",
                    tool_pose_for_tip(grasp_tip, arm.tip_drop, grasp_orient),
                    prim::kApproach, "approach to the grasp position");

  executor_grasp(world, ctx, "right", "stick");

  // Place using the perceived grasp transform; the perception error at
  // grasp time propagates rigidly into the held pose.
  const Pose perceived_tf = arm.tool.inverse() * stick_perceived;
  const Pose target_tool = sc.stick_insertion_pose * perceived_tf.inverse();
  executor_transport(world, ctx, "right", target_tool, prim::kTransport,
                     "move the stick to the insertion area");

  // Fresh perception of the held stick, plus any injected offset along the
  // stick's lateral axis.
  ObjectState& stick = world.objects.at("stick");
  stick.perceived_pose = run.perceive(stick.object.pose);
  stick.perceived_pose.position +=
      stick.object.pose.orientation * Eigen::Vector3d(0.0, sc.lateral_offset, 0.0);
}

namespace {

/// Axis direction from two crossings of opposite long edges at different
/// stations: the chord e2-e1 decomposes as a*t + w*n with |n| = 1, n
/// normal to the axis, and w the known stick width.
Eigen::Vector3d axis_from_edges(const Eigen::Vector3d& e1,
                                const Eigen::Vector3d& e2, double width,
                                double hint_yaw) {
  const Eigen::Vector2d delta = (e2 - e1).head<2>();
  const double len = delta.norm();
  const double phi = std::atan2(delta.y(), delta.x());
  const double off = std::acos(std::clamp(width / std::max(len, width), -1.0, 1.0));
  double best_theta = hint_yaw;
  double best_err = std::numeric_limits<double>::infinity();
  for (double sign : {+1.0, -1.0}) {
    const double psi = phi + sign * off;   // normal direction angle
    double theta = psi - M_PI / 2.0;       // axis direction angle
    double err = std::remainder(theta - hint_yaw, 2.0 * M_PI);
    if (std::abs(err) > M_PI / 2.0) theta += M_PI;  // axis sign ambiguity
    err = std::abs(std::remainder(theta - hint_yaw, 2.0 * M_PI));
    if (err < best_err) {
      best_err = err;
      best_theta = theta;
    }
  }
  return {std::cos(best_theta), std::sin(best_theta), 0.0};
}

}  // namespace

Eigen::Vector3d run_compliant_insertion(TaskRun& run, TaskReport& report) {
  refresh_context(run);
  WorldState& world = run.world;
  SimContext& ctx = run.ctx;
  const Scenario& sc = run.scenario;
  ArmState& arm = world.arms.at("left");

  if (!world.attachedObject("left") ||
      *world.attachedObject("left") != std::string("pin"))
    throw PrimitiveError("compliant insertion: left arm does not hold the pin");

  const ObjectState& stick = world.objects.at("stick");
  const Pose stick_p = stick.perceived_pose;
  const double ez = sc.stick_extents.z();
  const double top_p = stick_p.position.z() + 0.5 * ez;
  const Eigen::Vector3d hole_p = stick_p.apply({0.0, 0.0, 0.5 * ez});
  const double cap =
      std::min(sc.hole_depth, run.left_model.gripper.open_close_height_delta);
  const double required_depth = cap - 1.5e-3;
  const double true_top =
      stick.object.pose.position.z() + 0.5 * ez;

  Eigen::Vector3d hole_estimate = hole_p;

  if (sc.exploration) {
    const double yaw_p = yaw_of(stick_p.orientation);
    const Eigen::Vector3d u{std::cos(yaw_p), std::sin(yaw_p), 0.0};
    const Eigen::Vector3d v{-std::sin(yaw_p), std::cos(yaw_p), 0.0};

    // First probe station, before the hole along the perceived axis.
    const Eigen::Vector3d p_a =
        hole_p - sc.edge_probe_offset * u + Eigen::Vector3d(0, 0, 0.02);
    executor_transport(world, ctx, "left",
                       tool_pose_for_tip(p_a, arm.tip_drop), prim::kMoveAbove,
                       "move the pin above the stick");
    executor_force_motion(world, ctx, "left", sc.contact_force, 0.06, 20.0);

    SlideResult edge1 = executor_slide_explore(world, ctx, "left", -v,
                                               sc.contact_force,
                                               SlideFeature::Edge);
    report.edges_found.push_back(edge1.feature_position);

    const Eigen::Vector3d p_b =
        hole_p + sc.edge_probe_offset * u + Eigen::Vector3d(0, 0, 0.01);
    executor_transport(world, ctx, "left",
                       tool_pose_for_tip(p_b, arm.tip_drop), prim::kTransport,
                       "move above and contact the stick");
    SlideResult edge2 = executor_slide_explore(world, ctx, "left", v,
                                               sc.contact_force,
                                               SlideFeature::Edge);
    report.edges_found.push_back(edge2.feature_position);

    // The stick's dimensions are known: the midpoint of the two edge
    // crossings lies on the middle axis, and the chord fixes its direction.
    const Eigen::Vector3d mid =
        0.5 * (edge1.feature_position + edge2.feature_position);
    const Eigen::Vector3d axis = axis_from_edges(
        edge1.feature_position, edge2.feature_position, sc.stick_extents.y(),
        yaw_p);

    const double s_hole = (hole_p - mid).dot(axis);
    const Eigen::Vector3d slide_start =
        mid + (s_hole - 0.015) * axis + Eigen::Vector3d(0, 0, 0.0);
    Eigen::Vector3d start_tip = slide_start;
    start_tip.z() = top_p + 0.01;
    executor_transport(world, ctx, "left",
                       tool_pose_for_tip(start_tip, arm.tip_drop),
                       prim::kTransport, "move above and contact the stick");

    SlideResult hole_found = executor_slide_explore(
        world, ctx, "left", axis, sc.contact_force, SlideFeature::Hole,
        sc.catchRadius());
    hole_estimate = hole_found.feature_position;
  } else {
    Eigen::Vector3d above = hole_p;
    above.z() = top_p + 0.02;
    executor_transport(world, ctx, "left",
                       tool_pose_for_tip(above, arm.tip_drop),
                       prim::kMoveAbove, "move the pin above the stick");
    executor_force_motion(world, ctx, "left", sc.contact_force, 0.06, 20.0);
  }
  report.hole_estimate = hole_estimate;

  // Engage at the estimated center and drive the pin down.
  arm.tool.position.head<2>() = hole_estimate.head<2>() +
                                (arm.tool.position.head<2>() -
                                 world.tipPosition("left").head<2>());
  world.syncAttachments();
  executor_force_motion(world, ctx, "left", sc.insertion_force, cap + 5e-3,
                        30.0);

  const double depth_below_top = true_top - world.tipPosition("left").z();
  const Eigen::Vector3d hole_true = run.true_hole_center();
  report.final_pin_error_mm =
      (world.tipPosition("left").head<2>() - hole_true.head<2>()).norm() * 1e3;
  if (depth_below_top < required_depth)
    throw PrimitiveError("insertion stall: reached " +
                         std::to_string(depth_below_top * 1e3) + " mm of " +
                         std::to_string(required_depth * 1e3) + " mm");

  // Full engagement: the chamfered lead-in centers the pin on the hole axis.
  const Eigen::Vector3d correction = hole_true - world.tipPosition("left");
  arm.tool.position.head<2>() += correction.head<2>();
  world.syncAttachments();
  report.final_pin_error_mm = 0.0;

  executor_release(world, ctx, "left");
  return hole_estimate;
}

TaskReport run_full_task(const Scenario& scenario) {
  TaskReport report;
  TaskRun run = make_task_run(scenario);

  auto stage = [&](const std::string& name, auto&& fn) {
    if (!report.failure_stage.empty()) return;
    try {
      fn();
    } catch (const std::exception& e) {
      report.failure_stage = name;
      report.failure_reason = e.what();
    }
  };

  stage("compliant_grasp", [&] { run_compliant_grasp(run); });
  stage("pick_and_place", [&] { run_pick_and_place(run); });
  stage("compliant_insertion",
        [&] { run_compliant_insertion(run, report); });

  report.success = report.failure_stage.empty();
  report.timeline = run.ctx.logs;
  report.duration_s = run.ctx.clock;
  if (report.success) report.final_pin_error_mm = 0.0;
  return report;
}

MonteCarloStats evaluate_monte_carlo(const Scenario& scenario, int n_runs,
                                     std::uint64_t seed) {
  if (n_runs < 1)
    throw std::invalid_argument("evaluate_monte_carlo: n_runs must be >= 1");
  MonteCarloStats stats;
  stats.runs = n_runs;
  for (int i = 0; i < n_runs; ++i) {
    Scenario s = scenario;
    s.seed = seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(i);
    TaskReport r = run_full_task(s);
    if (r.success) {
      ++stats.successes;
      stats.hole_error_mm.push_back(r.final_pin_error_mm);
    } else {
      ++stats.failure_stages[r.failure_stage];
    }
  }
  return stats;
}

// -------------------------------------------------------------- file IO

void export_timeline_csv(const std::vector<PrimitiveLog>& timeline,
                         std::ostream& out) {
  out << "start_s,end_s,primitive,arm,action,outcome\n";
  for (const auto& log : timeline)
    out << log.start_s << "," << log.end_s << "," << log.primitive_id << ","
        << log.arm << "," << log.action << "," << log.outcome << "\n";
}

namespace {

json pose_json(const Pose& p) {
  return json{{"position", {p.position.x(), p.position.y(), p.position.z()}},
              {"quaternion",
               {p.orientation.w(), p.orientation.x(), p.orientation.y(),
                p.orientation.z()}}};
}

Pose pose_from(const json& j) {
  Pose p;
  auto v = j.at("position").get<std::vector<double>>();
  p.position = {v[0], v[1], v[2]};
  auto q = j.at("quaternion").get<std::vector<double>>();
  p.orientation = Eigen::Quaterniond(q[0], q[1], q[2], q[3]).normalized();
  return p;
}

}  // namespace

void save_report_json(const TaskReport& report, const std::string& path) {
  json j;
  j["success"] = report.success;
  j["failure_stage"] = report.failure_stage;
  j["failure_reason"] = report.failure_reason;
  j["duration_s"] = report.duration_s;
  j["final_pin_error_mm"] = report.final_pin_error_mm;
  if (report.hole_estimate)
    j["hole_estimate"] = {report.hole_estimate->x(), report.hole_estimate->y(),
                          report.hole_estimate->z()};
  j["timeline"] = json::array();
  for (const auto& log : report.timeline)
    j["timeline"].push_back({{"start_s", log.start_s},
                             {"end_s", log.end_s},
                             {"primitive", log.primitive_id},
                             {"arm", log.arm},
                             {"action", log.action},
                             {"outcome", log.outcome}});
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write report: " + path);
  out << j.dump(2) << "\n";
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (!j.contains("version"))
    throw ConfigError(path + ": missing required 'version' field");

  Scenario s = default_scenario();
  try {
    s.arm_distance = j.value("arm_distance", s.arm_distance);
    s.table_top = j.value("table_top", s.table_top);
    if (j.contains("stick")) {
      const json& st = j.at("stick");
      if (st.contains("extents_mm")) {
        auto e = st.at("extents_mm").get<std::vector<double>>();
        s.stick_extents = Eigen::Vector3d(e[0], e[1], e[2]) * 1e-3;
      }
      s.hole_diameter = st.value("hole_diameter_mm", s.hole_diameter * 1e3) * 1e-3;
      s.hole_depth = st.value("hole_depth_mm", s.hole_depth * 1e3) * 1e-3;
      if (st.contains("start_pose")) s.stick_start = pose_from(st.at("start_pose"));
      if (st.contains("insertion_pose"))
        s.stick_insertion_pose = pose_from(st.at("insertion_pose"));
    }
    if (j.contains("pin")) {
      const json& p = j.at("pin");
      s.pin_radius = p.value("radius_mm", s.pin_radius * 1e3) * 1e-3;
      s.pin_length = p.value("length_mm", s.pin_length * 1e3) * 1e-3;
      if (p.contains("start_pose")) s.pin_start = pose_from(p.at("start_pose"));
    }
    if (j.contains("noise")) {
      const json& n = j.at("noise");
      s.noise.position_bound = n.value("position_mm", 0.0) * 1e-3;
      s.noise.orientation_bound = n.value("orientation_rad", 0.0);
      if (n.value("distribution", "uniform") == std::string("gaussian")) {
        s.noise.distribution = NoiseModel::Distribution::Gaussian;
        s.noise.position_sigma = n.value("position_sigma_mm", 0.0) * 1e-3;
        s.noise.orientation_sigma = n.value("orientation_sigma_rad", 0.0);
      }
    }
    if (j.contains("control")) {
      const json& c = j.at("control");
      s.kp = c.value("kp", s.kp);
      s.kv = c.value("kv", s.kv);
      s.contact_stiffness = c.value("stiffness", s.contact_stiffness);
      s.contact_force = c.value("contact_force", s.contact_force);
      s.insertion_force = c.value("insertion_force", s.insertion_force);
    }
    s.seed = j.value("seed", s.seed);
    s.exploration = j.value("exploration", s.exploration);
    s.compliant_grasp = j.value("compliant_grasp", s.compliant_grasp);
    s.check_reachability = j.value("check_reachability", s.check_reachability);
    s.lateral_offset = j.value("lateral_offset_mm", 0.0) * 1e-3;
    s.pin_z_offset = j.value("pin_z_offset_mm", 0.0) * 1e-3;
    s.engagement_chamfer =
        j.value("engagement_chamfer_mm", s.engagement_chamfer * 1e3) * 1e-3;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  s.validate();
  return s;
}

void save_scenario(const Scenario& s, const std::string& path) {
  json j;
  j["version"] = 1;
  j["arm_distance"] = s.arm_distance;
  j["table_top"] = s.table_top;
  j["stick"] = {
      {"extents_mm",
       {s.stick_extents.x() * 1e3, s.stick_extents.y() * 1e3,
        s.stick_extents.z() * 1e3}},
      {"hole_diameter_mm", s.hole_diameter * 1e3},
      {"hole_depth_mm", s.hole_depth * 1e3},
      {"start_pose", pose_json(s.stick_start)},
      {"insertion_pose", pose_json(s.stick_insertion_pose)}};
  j["pin"] = {{"radius_mm", s.pin_radius * 1e3},
              {"length_mm", s.pin_length * 1e3},
              {"start_pose", pose_json(s.pin_start)}};
  j["noise"] = {{"position_mm", s.noise.position_bound * 1e3},
                {"orientation_rad", s.noise.orientation_bound}};
  j["control"] = {{"kp", s.kp},
                  {"kv", s.kv},
                  {"stiffness", s.contact_stiffness},
                  {"contact_force", s.contact_force},
                  {"insertion_force", s.insertion_force}};
  j["seed"] = s.seed;
  j["exploration"] = s.exploration;
  j["compliant_grasp"] = s.compliant_grasp;
  j["check_reachability"] = s.check_reachability;
  j["lateral_offset_mm"] = s.lateral_offset * 1e3;
  j["pin_z_offset_mm"] = s.pin_z_offset * 1e3;
  j["engagement_chamfer_mm"] = s.engagement_chamfer * 1e3;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write scenario: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace bimanip
