#include "bimanip/primitives.hpp"

#include "bimanip/kinematics.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

namespace bimanip {

using nlohmann::json;

// ------------------------------------------------------------- registry

std::vector<PrimitiveSpec> default_registry() {
  using enum ControlMode;
  using enum InteractionLevel;
  return {
      {prim::kApproach, "approach", Position, GripperOnly,
       "move the empty gripper to a target pose"},
      {prim::kRelease, "release", Position, SingleObject,
       "open the gripper and drop the attachment"},
      {prim::kContactGripper, "contact-without-motion", CompliantForce,
       SingleObject, "hold a contact force while the gripper acts"},
      {prim::kGrasp, "grasp", Position, SingleObject,
       "close the gripper on an object"},
      {prim::kMoveAbove, "move-above", Position, SingleObject,
       "position a grasped object over a target"},
      {prim::kTransport, "transport", Position, SingleObject,
       "move the arm with a grasped object"},
      {prim::kContactObject, "object-contact-without-motion", CompliantForce,
       MultiObject, "hold grasped-object contact against another object"},
      {prim::kForceMotion, "force-motion", CompliantForce, MultiObject,
       "force-controlled motion of the grasped object"},
      {prim::kImpedance, "impedance-motion", CompliantImpedance, MultiObject,
       "impedance-controlled extraction or insertion"},
      {prim::kSlideExplore, "slide-explore", CompliantForce, MultiObject,
       "slide the grasped object over a surface to find a feature"},
  };
}

namespace {

ControlMode mode_from_string(const std::string& s) {
  if (s == "position") return ControlMode::Position;
  if (s == "force") return ControlMode::CompliantForce;
  if (s == "impedance") return ControlMode::CompliantImpedance;
  throw ConfigError("unknown control mode: " + s);
}

InteractionLevel level_from_string(const std::string& s) {
  if (s == "gripper") return InteractionLevel::GripperOnly;
  if (s == "single-object") return InteractionLevel::SingleObject;
  if (s == "multi-object") return InteractionLevel::MultiObject;
  throw ConfigError("unknown interaction level: " + s);
}

}  // namespace

std::vector<PrimitiveSpec> load_registry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open registry file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }

  std::vector<PrimitiveSpec> registry = default_registry();
  for (const auto& entry : j.at("primitives")) {
    PrimitiveSpec spec;
    spec.id = entry.at("id").get<int>();
    spec.name = entry.at("name").get<std::string>();
    spec.control_mode = mode_from_string(entry.at("mode").get<std::string>());
    spec.interaction_level =
        level_from_string(entry.at("level").get<std::string>());
    spec.description = entry.value("description", "");
    if (find_spec(registry, spec.id))
      throw ConfigError(path + ": duplicate primitive id " +
                        std::to_string(spec.id));
    registry.push_back(spec);
  }
  return registry;
}

const PrimitiveSpec* find_spec(const std::vector<PrimitiveSpec>& registry,
                               int id) {
  for (const auto& s : registry)
    if (s.id == id) return &s;
  return nullptr;
}

// ----------------------------------------------------------- WorldState

Eigen::Vector3d WorldState::tipPosition(const std::string& arm) const {
  const ArmState& a = arms.at(arm);
  return a.tool.position - Eigen::Vector3d(0.0, 0.0, a.tip_drop);
}

void WorldState::syncAttachments() {
  for (const auto& [obj, arm] : attachments)
    objects.at(obj).object.pose = arms.at(arm).tool * grasp_transforms.at(obj);
}

std::optional<std::string> WorldState::attachedObject(
    const std::string& arm) const {
  for (const auto& [obj, holder] : attachments)
    if (holder == arm) return obj;
  return std::nullopt;
}

// ----------------------------------------------------------- SimContext

ForceControllerState SimContext::makeController() const {
  ForceControllerState c;
  c.kp = kp;
  c.kv = kv;
  c.dt = dt;
  return c;
}

ContactEnvironment SimContext::makeEnvironment(const WorldState& world,
                                               const std::string& arm) const {
  if (!surface_height)
    throw PrimitiveError("SimContext: no surface model installed");
  ContactEnvironment env;
  env.stiffness = contact_stiffness;
  env.surface_height = [this, &world, arm](const Eigen::Vector3d& p) {
    return surface_height(world, arm, p);
  };
  return env;
}

void PrimitiveInvocation::validateAgainst(const PrimitiveSpec& spec,
                                          const SensorRange& range) const {
  const bool compliant = spec.control_mode != ControlMode::Position;
  if (compliant && !force_setpoint)
    throw PrimitiveError("primitive " + std::to_string(spec.id) +
                         " is compliant and needs a force setpoint");
  if (!compliant && force_setpoint)
    throw PrimitiveError("primitive " + std::to_string(spec.id) +
                         " is position-mode; force setpoint not allowed");
  if (force_setpoint && std::abs(*force_setpoint) > range.force.z())
    throw PrimitiveError("force setpoint " + std::to_string(*force_setpoint) +
                         " N exceeds the sensor z range of " +
                         std::to_string(range.force.z()) + " N");
}

namespace {

struct LogScope {
  SimContext& ctx;
  PrimitiveLog entry;
  bool armed = true;

  LogScope(SimContext& c, int id, const std::string& arm,
           const std::string& action)
      : ctx(c) {
    entry.start_s = ctx.clock;
    entry.primitive_id = id;
    entry.arm = arm;
    entry.action = action;
    entry.outcome = "ok";
  }
  void fail(const std::string& why) { entry.outcome = why; }
  ~LogScope() {
    entry.end_s = ctx.clock;
    ctx.logs.push_back(entry);
  }
};

double move_duration(const SimContext& ctx, const Pose& from, const Pose& to) {
  const double lin = from.positionDistance(to) / ctx.move_speed;
  const double ang = from.rotationDistance(to) / 1.5;
  return std::max({lin, ang, ctx.dt});
}

void do_position_move(WorldState& world, SimContext& ctx,
                      const std::string& arm, const Pose& target) {
  ArmState& a = world.arms.at(arm);
  if (ctx.check_reachability) {
    auto it = ctx.models.find(arm);
    if (it != ctx.models.end() && it->second) {
      const ManipulatorModel& model = *it->second;
      Eigen::VectorXd seed = a.joints.size() == model.dof()
                                 ? a.joints
                                 : model.midConfiguration();
      try {
        a.joints = inverse_kinematics(model, target, seed);
      } catch (const IkError&) {
        throw PrimitiveError("arm '" + arm + "': target pose unreachable");
      }
    }
  }
  ctx.clock += move_duration(ctx, a.tool, target);
  a.tool = target;
  a.in_contact = false;
  world.syncAttachments();
}

}  // namespace

// ------------------------------------------------------------ executors

void executor_approach(WorldState& world, SimContext& ctx,
                       const std::string& arm, const Pose& target, int log_id,
                       const std::string& action) {
  LogScope log(ctx, log_id, arm, action);
  try {
    do_position_move(world, ctx, arm, target);
  } catch (const PrimitiveError& e) {
    log.fail(e.what());
    throw;
  }
}

void executor_release(WorldState& world, SimContext& ctx,
                      const std::string& arm) {
  LogScope log(ctx, prim::kRelease, arm, "release");
  auto obj = world.attachedObject(arm);
  if (!obj) {
    log.fail("nothing grasped");
    throw PrimitiveError("release: arm '" + arm + "' holds nothing");
  }
  world.attachments.erase(*obj);
  world.grasp_transforms.erase(*obj);
  ArmState& a = world.arms.at(arm);
  auto it = ctx.models.find(arm);
  if (a.gripper_closed && it != ctx.models.end() && it->second)
    a.tip_drop += it->second->gripper.open_close_height_delta;
  a.gripper_closed = false;
  a.gripper_opening = it != ctx.models.end() && it->second
                          ? it->second->gripper.max_opening
                          : 0.085;
  ctx.clock += 1.0;
}

void executor_grasp(WorldState& world, SimContext& ctx, const std::string& arm,
                    const std::string& object) {
  LogScope log(ctx, prim::kGrasp, arm, "grasp " + object);
  auto obj_it = world.objects.find(object);
  if (obj_it == world.objects.end()) {
    log.fail("no such object");
    throw PrimitiveError("grasp: unknown object '" + object + "'");
  }
  if (world.attachments.count(object)) {
    log.fail("already grasped");
    throw PrimitiveError("grasp: object '" + object + "' already attached");
  }

  const ManipulatorModel* model = ctx.models.count(arm) ? ctx.models.at(arm)
                                                        : nullptr;
  const double span = model ? model->gripper.max_opening : 0.085;
  const SceneObject& so = obj_it->second.object;
  double width = 0.0;
  if (so.cylinder_radius)
    width = 2.0 * *so.cylinder_radius;
  else if (so.box_extents)
    width = so.box_extents->minCoeff();

  const Eigen::Vector3d tip = world.tipPosition(arm);
  const Eigen::Vector3d obj_pos = so.pose.position;
  const double lateral =
      (tip.head<2>() - obj_pos.head<2>()).norm();
  if (width >= span || lateral > 0.5 * (span - width)) {
    log.fail("object outside jaw span");
    throw PrimitiveError("grasp: object '" + object +
                         "' outside the gripper span");
  }

  // Vertical engagement: small objects must be pinched near their base, a
  // box just needs the fingertips below its top.
  double obj_bottom = obj_pos.z();
  double obj_top = obj_pos.z();
  if (so.cylinder_length) {
    obj_bottom -= 0.5 * *so.cylinder_length;
    obj_top += 0.5 * *so.cylinder_length;
  } else if (so.box_extents) {
    obj_bottom -= 0.5 * so.box_extents->z();
    obj_top += 0.5 * so.box_extents->z();
  }
  const double allow = 1.5e-3;
  if (so.kind == SceneObject::Kind::Pin) {
    const double window = 2e-3;
    if (tip.z() < obj_bottom - allow) {
      log.fail("fingertips collide with the support");
      throw PrimitiveError("grasp: fingertips below the object support");
    }
    if (tip.z() > obj_bottom + window) {
      log.fail("grasp miss: fingertips too high");
      throw PrimitiveError("grasp: fingertips above the pin grasp window");
    }
  } else {
    if (tip.z() > obj_top - 2e-3) {
      log.fail("grasp miss: fingertips above the object");
      throw PrimitiveError("grasp: fingertips not engaged with the object");
    }
  }

  ArmState& a = world.arms.at(arm);
  if (!a.gripper_closed) {
    if (model) a.tip_drop -= model->gripper.open_close_height_delta;
    a.gripper_closed = true;
  }
  a.gripper_opening = width;
  world.attachments[object] = arm;
  world.grasp_transforms[object] = a.tool.inverse() * so.pose;
  ctx.clock += 1.0;
  world.syncAttachments();
}

void executor_transport(WorldState& world, SimContext& ctx,
                        const std::string& arm, const Pose& target, int log_id,
                        const std::string& action) {
  LogScope log(ctx, log_id, arm, action);
  try {
    do_position_move(world, ctx, arm, target);
  } catch (const PrimitiveError& e) {
    log.fail(e.what());
    throw;
  }
}

void executor_contact_no_motion(WorldState& world, SimContext& ctx,
                                const std::string& arm, double force_setpoint,
                                bool close_gripper, int log_id) {
  LogScope log(ctx, log_id, arm, close_gripper
                                     ? "contact hold + close gripper"
                                     : "contact hold");
  ArmState& a = world.arms.at(arm);
  ContactEnvironment env = ctx.makeEnvironment(world, arm);

  Eigen::Vector3d tip = world.tipPosition(arm);
  GuardedMoveResult guard;
  try {
    guard = guarded_move(env, tip, {0.0, 0.0, -1.0}, ctx.approach_speed,
                         force_setpoint, ctx.max_guard_travel, ctx.dt);
  } catch (const ForceLoopError& e) {
    log.fail("contact never detected");
    throw PrimitiveError(std::string("contact-without-motion: ") + e.what());
  }
  ctx.clock += guard.trace.steps.size() * ctx.dt;

  // Hold the setpoint while the gripper acts.
  ForceControllerState controller = ctx.makeController();
  const Eigen::Vector3d hold_ref = guard.contact_position;
  LoopTrace hold = simulate_contact_loop(
      controller, env, [&](double) { return hold_ref; },
      {0.0, 0.0, -force_setpoint}, 1.5, {});
  ctx.clock += hold.steps.size() * ctx.dt;

  const Eigen::Vector3d final_tip =
      hold.steps.back().x_c;
  a.tool.position = final_tip + Eigen::Vector3d(0.0, 0.0, a.tip_drop);
  a.in_contact = true;
  if (close_gripper) a.gripper_opening = 0.0;
  world.syncAttachments();
}

ForceMotionResult executor_force_motion(WorldState& world, SimContext& ctx,
                                        const std::string& arm,
                                        double force_setpoint,
                                        double max_depth, double timeout_s) {
  LogScope log(ctx, prim::kForceMotion, arm, "force-controlled motion");
  ArmState& a = world.arms.at(arm);
  ContactEnvironment env = ctx.makeEnvironment(world, arm);
  ForceControllerState controller = ctx.makeController();
  const Eigen::Vector3d f_r(0.0, 0.0, -force_setpoint);

  Eigen::Vector3d tip = world.tipPosition(arm);
  const double start_z = tip.z();
  Eigen::Vector3d x_f = Eigen::Vector3d::Zero();
  const int max_steps = static_cast<int>(timeout_s / ctx.dt);
  int settled = 0;
  ForceMotionResult result;
  bool done = false;
  int step = 0;
  for (; step < max_steps; ++step) {
    const Eigen::Vector3d reaction = environment_force(env, tip).force;
    x_f += compensator_step(controller, f_r, -reaction);
    const double prev_z = tip.z();
    tip.z() = std::max(start_z + x_f.z(), start_z - max_depth);
    const double depth = start_z - tip.z();
    const bool in_contact = reaction.z() > 0.5 * force_setpoint;
    if (in_contact && std::abs(reaction.z() - force_setpoint) <
                          0.05 * force_setpoint &&
        std::abs(tip.z() - prev_z) < 1e-8) {
      if (++settled > 100) {
        result.bottomed_out = true;
        result.depth_reached = depth;
        done = true;
        break;
      }
    } else {
      settled = 0;
    }
    if (depth >= max_depth - 1e-9) {
      result.depth_reached = depth;
      done = true;
      break;
    }
  }
  ctx.clock += (step + 1) * ctx.dt;
  a.tool.position = tip + Eigen::Vector3d(0.0, 0.0, a.tip_drop);
  a.in_contact = result.bottomed_out;
  world.syncAttachments();
  if (!done) {
    log.fail("timeout without termination signature");
    throw PrimitiveError("force-motion: timeout without settling");
  }
  return result;
}

SlideResult executor_slide_explore(WorldState& world, SimContext& ctx,
                                   const std::string& arm,
                                   const Eigen::Vector3d& axis,
                                   double force_setpoint, SlideFeature feature,
                                   double onset_offset) {
  LogScope log(ctx, prim::kSlideExplore, arm, feature == SlideFeature::Edge
                                                  ? "slide to edge"
                                                  : "slide to hole");
  ArmState& a = world.arms.at(arm);
  ContactEnvironment env = ctx.makeEnvironment(world, arm);
  ForceControllerState controller = ctx.makeController();
  Eigen::Vector3d dir = axis;
  dir.z() = 0.0;
  if (dir.norm() < 1e-12)
    throw PrimitiveError("slide-explore: axis must have a lateral component");
  dir.normalize();
  const double drop_threshold = feature == SlideFeature::Edge
                                    ? ctx.edge_drop_threshold
                                    : ctx.hole_drop_threshold;
  const Eigen::Vector3d f_r(0.0, 0.0, -force_setpoint);

  Eigen::Vector3d tip = world.tipPosition(arm);
  Eigen::Vector3d ref = tip;  // xy advances, z fixed; x_f supplies contact
  Eigen::Vector3d x_f = Eigen::Vector3d::Zero();

  // Settle into contact before sliding.
  int steps = 0;
  for (int i = 0; i < 4000; ++i) {
    const Eigen::Vector3d reaction = environment_force(env, tip).force;
    x_f += compensator_step(controller, f_r, -reaction);
    tip.z() = ref.z() + x_f.z();
    ++steps;
    if (reaction.z() > 0.9 * force_setpoint &&
        std::abs(reaction.z() - force_setpoint) < 0.02 * force_setpoint)
      break;
  }
  if (environment_force(env, tip).force.z() < 0.5 * force_setpoint) {
    ctx.clock += steps * ctx.dt;
    log.fail("no supporting contact");
    throw PrimitiveError("slide-explore: not in contact with a surface");
  }

  double travelled = 0.0;
  std::optional<Eigen::Vector3d> onset;
  double onset_support = 0.0;
  SlideResult result;
  bool found = false;
  while (travelled <= ctx.max_slide_travel) {
    const Eigen::Vector3d f_s = environment_force(env, tip).force;
    const bool in_contact = f_s.z() > 0.2 * force_setpoint;
    if (!onset) {
      if (in_contact) {
        ref += dir * ctx.slide_speed * ctx.dt;
        travelled += ctx.slide_speed * ctx.dt;
      } else {
        // Support vanished: freeze the slide, remember where, and let the
        // controller descend to probe the new support height.
        onset = tip;
        onset_support = tip.z();
      }
    } else {
      const double fallen = onset_support - tip.z();
      if (in_contact) {
        if (fallen >= drop_threshold) {
          found = true;
        } else {
          onset.reset();  // shallow dip, keep sliding
        }
      } else if (fallen >= drop_threshold + 1e-3) {
        found = true;  // fell clear past the threshold with no new support
      }
      if (found) break;
    }
    x_f += compensator_step(controller, f_r, -f_s);
    tip.head<2>() = ref.head<2>() + x_f.head<2>();
    tip.z() = ref.z() + x_f.z();
    ++steps;
  }
  ctx.clock += steps * ctx.dt;
  a.tool.position = tip + Eigen::Vector3d(0.0, 0.0, a.tip_drop);
  world.syncAttachments();
  if (!found) {
    log.fail("no feature within travel bound");
    throw PrimitiveError("slide-explore: feature not found within travel");
  }
  result.feature_position = *onset + dir * onset_offset;
  result.feature_position.z() = onset_support;
  result.travel = travelled;
  a.in_contact = environment_force(env, tip).force.z() > 0.0;
  return result;
}

// ------------------------------------------------------------- dispatch

void execute_primitive(WorldState& world, const PrimitiveInvocation& inv,
                       const std::vector<PrimitiveSpec>& registry,
                       SimContext& ctx) {
  const PrimitiveSpec* spec = find_spec(registry, inv.spec_id);
  if (!spec)
    throw PrimitiveError("unknown primitive id " +
                         std::to_string(inv.spec_id));
  SensorRange range;
  if (ctx.models.count(inv.arm) && ctx.models.at(inv.arm))
    range = ctx.models.at(inv.arm)->sensor_range;
  inv.validateAgainst(*spec, range);

  auto need_target = [&]() -> const Pose& {
    if (!inv.target)
      throw PrimitiveError("primitive " + std::to_string(inv.spec_id) +
                           " needs a target pose");
    return *inv.target;
  };

  switch (inv.spec_id) {
    case prim::kApproach:
      executor_approach(world, ctx, inv.arm, need_target(), inv.spec_id,
                        spec->name);
      break;
    case prim::kRelease:
      executor_release(world, ctx, inv.arm);
      break;
    case prim::kGrasp:
      if (!inv.object)
        throw PrimitiveError("grasp needs an object name");
      executor_grasp(world, ctx, inv.arm, *inv.object);
      break;
    case prim::kMoveAbove:
    case prim::kTransport:
      executor_transport(world, ctx, inv.arm, need_target(), inv.spec_id,
                         spec->name);
      break;
    case prim::kContactGripper:
    case prim::kContactObject:
      executor_contact_no_motion(world, ctx, inv.arm, *inv.force_setpoint,
                                 inv.close_gripper, inv.spec_id);
      break;
    case prim::kForceMotion:
      executor_force_motion(world, ctx, inv.arm, *inv.force_setpoint, 0.05,
                            30.0);
      break;
    case prim::kSlideExplore: {
      if (!inv.direction)
        throw PrimitiveError("slide-explore needs a direction");
      executor_slide_explore(world, ctx, inv.arm, *inv.direction,
                             *inv.force_setpoint, SlideFeature::Edge);
      break;
    }
    default:
      throw PrimitiveError("no executor for primitive id " +
                           std::to_string(inv.spec_id));
  }
}

}  // namespace bimanip
