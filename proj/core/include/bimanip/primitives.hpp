#ifndef BIMANIP_PRIMITIVES_HPP
#define BIMANIP_PRIMITIVES_HPP

#include "bimanip/force_control.hpp"
#include "bimanip/model.hpp"

#include <functional>
#include <map>
#include <optional>

namespace bimanip {

enum class ControlMode { Position, CompliantForce, CompliantImpedance };
enum class InteractionLevel { GripperOnly, SingleObject, MultiObject };

struct PrimitiveSpec {
  int id = 0;
  std::string name;
  ControlMode control_mode = ControlMode::Position;
  InteractionLevel interaction_level = InteractionLevel::GripperOnly;
  std::string description;
};

/// Well-known primitive ids used by the insertion task.
namespace prim {
constexpr int kApproach = 2;
constexpr int kRelease = 3;
constexpr int kContactGripper = 5;
constexpr int kGrasp = 9;
constexpr int kMoveAbove = 10;
constexpr int kTransport = 11;
constexpr int kContactObject = 13;
constexpr int kForceMotion = 14;
constexpr int kImpedance = 15;
constexpr int kSlideExplore = 16;
}  // namespace prim

/// The ten primitives fixed by the taxonomy; further entries come from a
/// registry config file.
std::vector<PrimitiveSpec> default_registry();
std::vector<PrimitiveSpec> load_registry(const std::string& path);
const PrimitiveSpec* find_spec(const std::vector<PrimitiveSpec>& registry,
                               int id);

struct ObjectState {
  SceneObject object;   ///< object.pose is the true pose
  Pose perceived_pose;  ///< what perception reports
};

struct ArmState {
  Pose tool;  ///< tool (flange) frame in world
  Eigen::VectorXd joints;
  double gripper_opening = 0.085;  ///< [m]
  bool gripper_closed = false;
  double tip_drop = 0.0;  ///< tool frame to contact point, +z down [m]
  bool in_contact = false;
};

struct WorldState {
  std::map<std::string, ArmState> arms;
  std::map<std::string, ObjectState> objects;
  std::map<std::string, std::string> attachments;  ///< object -> arm
  std::map<std::string, Pose> grasp_transforms;    ///< object -> tool->object

  Eigen::Vector3d tipPosition(const std::string& arm) const;
  /// Re-poses every attached object rigidly under its arm's tool frame.
  void syncAttachments();
  std::optional<std::string> attachedObject(const std::string& arm) const;
};

struct PrimitiveLog {
  double start_s = 0.0;
  double end_s = 0.0;
  int primitive_id = 0;
  std::string arm;
  std::string action;
  std::string outcome;  ///< "ok" or an error note
};

class PrimitiveError : public std::runtime_error {
public:
  explicit PrimitiveError(const std::string& what) : std::runtime_error(what) {}
};

/// Shared simulation context: arm models, controller defaults, contact
/// model, clock, and the primitive log.
struct SimContext {
  std::map<std::string, const ManipulatorModel*> models;
  double dt = 1e-3;                      ///< [s]
  Eigen::Vector3d kp{1e-5, 1e-5, 1e-5};  ///< compensator gains [m/N]
  Eigen::Vector3d kv{Eigen::Vector3d::Zero()};
  double contact_stiffness = 1e4;   ///< [N/m]
  double move_speed = 0.25;         ///< free-space [m/s]
  double approach_speed = 0.02;     ///< guarded moves [m/s]
  double slide_speed = 0.002;       ///< exploration [m/s]
  double edge_drop_threshold = 2e-3;   ///< [m]
  double hole_drop_threshold = 3e-3;   ///< [m]
  double max_guard_travel = 0.2;       ///< [m]
  double max_slide_travel = 0.2;       ///< [m]
  bool check_reachability = true;

  /// Height of the supporting surface under a contact point, from the true
  /// world state. Installed by the scenario layer.
  std::function<double(const WorldState&, const std::string& arm,
                       const Eigen::Vector3d& tip)>
      surface_height;

  double clock = 0.0;
  std::vector<PrimitiveLog> logs;

  ForceControllerState makeController() const;
  ContactEnvironment makeEnvironment(const WorldState& world,
                                     const std::string& arm) const;
};

struct PrimitiveInvocation {
  int spec_id = 0;
  std::string arm;
  std::optional<Pose> target;
  std::optional<double> force_setpoint;      ///< [N], along -z contact normal
  std::optional<Eigen::Vector3d> direction;  ///< slides / guarded moves
  std::optional<std::string> object;         ///< grasp/release target
  bool close_gripper = false;

  void validateAgainst(const PrimitiveSpec& spec,
                       const SensorRange& range) const;
};

/// Validates the invocation against the registry entry and dispatches to
/// the matching executor. Appends exactly one log entry.
void execute_primitive(WorldState& world, const PrimitiveInvocation& inv,
                       const std::vector<PrimitiveSpec>& registry,
                       SimContext& ctx);

// Position-mode executors.
void executor_approach(WorldState& world, SimContext& ctx,
                       const std::string& arm, const Pose& target, int log_id,
                       const std::string& action);
void executor_release(WorldState& world, SimContext& ctx,
                      const std::string& arm);
void executor_grasp(WorldState& world, SimContext& ctx, const std::string& arm,
                    const std::string& object);
void executor_transport(WorldState& world, SimContext& ctx,
                        const std::string& arm, const Pose& target, int log_id,
                        const std::string& action);

// Compliant-mode executors.
void executor_contact_no_motion(WorldState& world, SimContext& ctx,
                                const std::string& arm, double force_setpoint,
                                bool close_gripper, int log_id);
struct ForceMotionResult {
  double depth_reached = 0.0;  ///< descent below the starting height [m]
  bool bottomed_out = false;
};
ForceMotionResult executor_force_motion(WorldState& world, SimContext& ctx,
                                        const std::string& arm,
                                        double force_setpoint,
                                        double max_depth, double timeout_s);
enum class SlideFeature { Edge, Hole };
struct SlideResult {
  Eigen::Vector3d feature_position;  ///< onset-compensated estimate
  double travel = 0.0;
};
SlideResult executor_slide_explore(WorldState& world, SimContext& ctx,
                                   const std::string& arm,
                                   const Eigen::Vector3d& axis,
                                   double force_setpoint, SlideFeature feature,
                                   double onset_offset = 0.0);

}  // namespace bimanip

#endif
