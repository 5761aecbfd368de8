#include "bimanip/planner.hpp"

#include <cmath>
#include <ostream>

namespace bimanip {

namespace {

std::vector<Eigen::Vector3d> chain_points(const ManipulatorModel& model,
                                          const Eigen::VectorXd& q) {
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(model.dof() + 2);
  Pose T = model.base_pose;
  pts.push_back(T.position);
  for (int j = 0; j < model.dof(); ++j) {
    const JointSpec& jt = model.joints[j];
    Pose pre = T * jt.origin;
    pts.push_back(pre.position);
    Pose rot;
    rot.orientation = Eigen::Quaterniond(Eigen::AngleAxisd(q[j], jt.axis));
    T = pre * rot;
  }
  pts.push_back((T * model.sensor_offset).position);
  return pts;
}

}  // namespace

std::vector<Capsule> CollisionScene::robot_capsules(
    const ManipulatorModel& model, const Eigen::VectorXd& q, double radius) {
  const auto pts = chain_points(model, q);
  // Merge near-collinear consecutive segments. Otherwise short wrist links
  // sit inside the capsule radius of their next-nearest neighbor and every
  // straight posture reads as a self collision.
  std::vector<Capsule> caps;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Eigen::Vector3d seg = pts[i + 1] - pts[i];
    if (seg.norm() < 1e-9) continue;
    if (!caps.empty()) {
      const Eigen::Vector3d prev = caps.back().b - caps.back().a;
      const double cosang = prev.dot(seg) / (prev.norm() * seg.norm());
      if (cosang > std::cos(15.0 * M_PI / 180.0)) {
        caps.back().b = pts[i + 1];
        continue;
      }
    }
    caps.push_back({pts[i], pts[i + 1], radius});
  }
  return caps;
}

void CollisionScene::freezeArm(const ManipulatorModel& model,
                               const Eigen::VectorXd& q, double radius) {
  auto caps = robot_capsules(model, q, radius);
  capsules.insert(capsules.end(), caps.begin(), caps.end());
}

double segment_segment_distance(const Eigen::Vector3d& p1,
                                const Eigen::Vector3d& q1,
                                const Eigen::Vector3d& p2,
                                const Eigen::Vector3d& q2) {
  // Closest points between two segments (Ericson, Real-Time Collision
  // Detection, 5.1.9).
  const Eigen::Vector3d d1 = q1 - p1;
  const Eigen::Vector3d d2 = q2 - p2;
  const Eigen::Vector3d r = p1 - p2;
  const double a = d1.dot(d1);
  const double e = d2.dot(d2);
  const double f = d2.dot(r);
  double s, t;
  if (a <= 1e-18 && e <= 1e-18) return r.norm();
  if (a <= 1e-18) {
    s = 0.0;
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 1e-18) {
      t = 0.0;
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > 1e-18 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return (p1 + d1 * s - (p2 + d2 * t)).norm();
}

namespace {

double point_aabb_distance(const Eigen::Vector3d& p,
                           const Eigen::Vector3d& half) {
  Eigen::Vector3d d = p.cwiseAbs() - half;
  return d.cwiseMax(0.0).norm();
}

}  // namespace

double segment_box_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                            const CollisionBox& box) {
  const Pose inv = box.pose.inverse();
  const Eigen::Vector3d la = inv.apply(a);
  const Eigen::Vector3d lb = inv.apply(b);
  // Distance from a point on the segment to the box is convex in the
  // segment parameter, so ternary search converges to the minimum.
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    const double d1 = point_aabb_distance(la + m1 * (lb - la), box.half_extents);
    const double d2 = point_aabb_distance(la + m2 * (lb - la), box.half_extents);
    if (d1 < d2)
      hi = m2;
    else
      lo = m1;
  }
  const double t = 0.5 * (lo + hi);
  return point_aabb_distance(la + t * (lb - la), box.half_extents);
}

bool collides(const CollisionScene& scene, const Eigen::VectorXd& q) {
  if (!scene.robot) throw std::invalid_argument("collides: no robot in scene");
  const auto caps = CollisionScene::robot_capsules(*scene.robot, q,
                                                  scene.link_radius);
  // Self collision, adjacent pairs excluded.
  for (std::size_t i = 0; i < caps.size(); ++i)
    for (std::size_t j = i + 2; j < caps.size(); ++j)
      if (segment_segment_distance(caps[i].a, caps[i].b, caps[j].a,
                                   caps[j].b) <=
          caps[i].radius + caps[j].radius)
        return true;
  for (const auto& c : caps) {
    for (const auto& box : scene.boxes)
      if (segment_box_distance(c.a, c.b, box) <= c.radius) return true;
    for (const auto& o : scene.capsules)
      if (segment_segment_distance(c.a, c.b, o.a, o.b) <= c.radius + o.radius)
        return true;
  }
  return false;
}

bool edge_valid(const CollisionScene& scene, const Eigen::VectorXd& from,
                const Eigen::VectorXd& to, double resolution) {
  const double dist = (to - from).lpNorm<Eigen::Infinity>();
  const int steps = std::max(1, static_cast<int>(std::ceil(dist / resolution)));
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    if (collides(scene, from + t * (to - from))) return false;
  }
  return true;
}

namespace {

struct Tree {
  std::vector<Eigen::VectorXd> nodes;
  std::vector<int> parent;

  int nearest(const Eigen::VectorXd& q) const {
    int best = 0;
    double best_d = (nodes[0] - q).squaredNorm();
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      const double d = (nodes[i] - q).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    return best;
  }

  int add(const Eigen::VectorXd& q, int par) {
    nodes.push_back(q);
    parent.push_back(par);
    return static_cast<int>(nodes.size()) - 1;
  }
};

enum class ExtendResult { Trapped, Advanced, Reached };

ExtendResult extend(Tree& tree, const CollisionScene& scene,
                    const Eigen::VectorXd& target,
                    const PlannerParams& params, int& new_index) {
  const int near = tree.nearest(target);
  const Eigen::VectorXd& q_near = tree.nodes[near];
  Eigen::VectorXd diff = target - q_near;
  const double dist = diff.norm();
  Eigen::VectorXd q_new = target;
  bool reached = true;
  if (dist > params.extend_step) {
    q_new = q_near + diff * (params.extend_step / dist);
    reached = false;
  }
  if (!edge_valid(scene, q_near, q_new, params.edge_resolution))
    return ExtendResult::Trapped;
  new_index = tree.add(q_new, near);
  return reached ? ExtendResult::Reached : ExtendResult::Advanced;
}

std::vector<Eigen::VectorXd> trace_back(const Tree& tree, int index) {
  std::vector<Eigen::VectorXd> out;
  for (int i = index; i >= 0; i = tree.parent[i]) out.push_back(tree.nodes[i]);
  return out;
}

}  // namespace

JointPath rrt_connect(const CollisionScene& scene, const Eigen::VectorXd& start,
                      const Eigen::VectorXd& goal, const PlannerParams& params,
                      std::uint64_t seed) {
  const ManipulatorModel& model = *scene.robot;
  if (!model.withinLimits(start) || !model.withinLimits(goal))
    throw std::invalid_argument("rrt_connect: endpoints outside joint limits");
  if (collides(scene, start)) throw PlanningError("rrt_connect: start in collision");
  if (collides(scene, goal)) throw PlanningError("rrt_connect: goal in collision");

  JointPath path;
  path.resolution = params.edge_resolution;
  if ((goal - start).norm() < 1e-12) {
    path.waypoints = {start};
    return path;
  }

  Rng rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto sample = [&]() {
    Eigen::VectorXd q(model.dof());
    for (int j = 0; j < model.dof(); ++j) {
      std::uniform_real_distribution<double> d(model.joints[j].lower,
                                               model.joints[j].upper);
      q[j] = d(rng);
    }
    return q;
  };

  Tree ta, tb;
  ta.add(start, -1);
  tb.add(goal, -1);
  bool a_is_start = true;

  for (int iter = 0; iter < params.max_iterations; ++iter) {
    Eigen::VectorXd target =
        uni(rng) < params.goal_bias ? tb.nodes[tb.nearest(ta.nodes.back())]
                                    : sample();
    int idx_a = -1;
    if (extend(ta, scene, target, params, idx_a) != ExtendResult::Trapped) {
      // Greedily connect the other tree toward the new node.
      const Eigen::VectorXd& q_new = ta.nodes[idx_a];
      int idx_b = -1;
      ExtendResult r = ExtendResult::Advanced;
      while (r == ExtendResult::Advanced)
        r = extend(tb, scene, q_new, params, idx_b);
      if (r == ExtendResult::Reached) {
        auto part_a = trace_back(ta, idx_a);  // q_new .. start-of-ta
        auto part_b = trace_back(tb, idx_b);  // q_new .. root-of-tb
        std::reverse(part_a.begin(), part_a.end());
        part_a.insert(part_a.end(), part_b.begin() + 1, part_b.end());
        if (!a_is_start) std::reverse(part_a.begin(), part_a.end());
        path.waypoints = std::move(part_a);

        // Shortcut smoothing.
        std::uniform_int_distribution<int> pick(0, 1 << 30);
        for (int s = 0; s < params.shortcut_attempts &&
                        path.waypoints.size() > 2; ++s) {
          const int n = static_cast<int>(path.waypoints.size());
          int i = pick(rng) % n;
          int j = pick(rng) % n;
          if (i > j) std::swap(i, j);
          if (j - i < 2) continue;
          if (edge_valid(scene, path.waypoints[i], path.waypoints[j],
                         params.edge_resolution))
            path.waypoints.erase(path.waypoints.begin() + i + 1,
                                 path.waypoints.begin() + j);
        }
        return path;
      }
    }
    std::swap(ta, tb);
    a_is_start = !a_is_start;
  }
  throw PlanningError("rrt_connect: iteration budget exhausted");
}

std::vector<JointPath> prioritized_plan(
    const std::vector<ArmPlanRequest>& arms,
    const std::vector<CollisionBox>& world_boxes,
    const std::vector<Capsule>& world_capsules, const PlannerParams& params,
    std::uint64_t seed) {
  std::vector<JointPath> paths;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    CollisionScene scene;
    scene.robot = arms[i].model;
    scene.boxes = world_boxes;
    scene.capsules = world_capsules;
    // Other arms frozen at their latest known configuration: the goal when
    // already planned, the start otherwise.
    for (std::size_t k = 0; k < arms.size(); ++k) {
      if (k == i) continue;
      scene.freezeArm(*arms[k].model, k < i ? arms[k].goal : arms[k].start);
    }
    try {
      paths.push_back(rrt_connect(scene, arms[i].start, arms[i].goal, params,
                                  seed + i));
    } catch (const PlanningError& e) {
      throw PlanningError("prioritized_plan: arm '" + arms[i].name +
                          "' failed: " + e.what());
    }
  }
  return paths;
}

void export_path_csv(const JointPath& path, std::ostream& out) {
  if (path.waypoints.empty()) return;
  out << "index";
  for (Eigen::Index j = 1; j <= path.waypoints[0].size(); ++j)
    out << ",q" << j;
  out << "\n";
  for (std::size_t i = 0; i < path.waypoints.size(); ++i) {
    out << i;
    for (Eigen::Index j = 0; j < path.waypoints[i].size(); ++j)
      out << "," << path.waypoints[i][j];
    out << "\n";
  }
}

}  // namespace bimanip
