#ifndef BIMANIP_PLANNER_HPP
#define BIMANIP_PLANNER_HPP

#include "bimanip/kinematics.hpp"
#include "bimanip/model.hpp"

namespace bimanip {

struct Capsule {
  Eigen::Vector3d a, b;  ///< segment endpoints [m]
  double radius = 0.0;   ///< [m]
};

struct CollisionBox {
  Pose pose;                 ///< box center frame
  Eigen::Vector3d half_extents{Eigen::Vector3d::Zero()};
};

/// Static collision world for one planning query: boxes, capsules, and the
/// other arm frozen at a fixed configuration.
struct CollisionScene {
  const ManipulatorModel* robot = nullptr;
  double link_radius = 0.05;  ///< capsule radius for robot links [m]
  std::vector<CollisionBox> boxes;
  std::vector<Capsule> capsules;  ///< static obstacles + frozen arms

  /// Capsule chain of a robot at configuration q (joint origins + flange).
  static std::vector<Capsule> robot_capsules(const ManipulatorModel& model,
                                             const Eigen::VectorXd& q,
                                             double radius);
  void freezeArm(const ManipulatorModel& model, const Eigen::VectorXd& q,
                 double radius = 0.05);
};

struct PlannerParams {
  double extend_step = 0.1;       ///< [rad] RRT extension step
  double edge_resolution = 0.02;  ///< [rad] max joint step during validation
  double goal_bias = 0.1;
  int max_iterations = 50000;
  int shortcut_attempts = 200;
};

struct JointPath {
  std::vector<Eigen::VectorXd> waypoints;
  double resolution = 0.02;  ///< validation resolution [rad]
};

class PlanningError : public std::runtime_error {
public:
  explicit PlanningError(const std::string& what) : std::runtime_error(what) {}
};

double segment_segment_distance(const Eigen::Vector3d& p1,
                                const Eigen::Vector3d& q1,
                                const Eigen::Vector3d& p2,
                                const Eigen::Vector3d& q2);
double segment_box_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                            const CollisionBox& box);

/// True iff any active pair penetrates; exact tangency counts as collision.
bool collides(const CollisionScene& scene, const Eigen::VectorXd& q);

/// Straight-segment validity at the given resolution.
bool edge_valid(const CollisionScene& scene, const Eigen::VectorXd& from,
                const Eigen::VectorXd& to, double resolution);

/// Bidirectional RRT with shortcut smoothing; deterministic per seed.
JointPath rrt_connect(const CollisionScene& scene, const Eigen::VectorXd& start,
                      const Eigen::VectorXd& goal, const PlannerParams& params,
                      std::uint64_t seed);

struct ArmPlanRequest {
  std::string name;
  const ManipulatorModel* model = nullptr;
  Eigen::VectorXd start;
  Eigen::VectorXd goal;
};

/// Plans arms in order, freezing every other arm at its latest known
/// configuration (goal if already planned, start otherwise). A failure
/// aborts with the failing arm named in the error.
std::vector<JointPath> prioritized_plan(const std::vector<ArmPlanRequest>& arms,
                                        const std::vector<CollisionBox>& world_boxes,
                                        const std::vector<Capsule>& world_capsules,
                                        const PlannerParams& params,
                                        std::uint64_t seed);

void export_path_csv(const JointPath& path, std::ostream& out);

}  // namespace bimanip

#endif
