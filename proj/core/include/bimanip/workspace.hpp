#ifndef BIMANIP_WORKSPACE_HPP
#define BIMANIP_WORKSPACE_HPP

#include "bimanip/kinematics.hpp"
#include "bimanip/model.hpp"

#include <iosfwd>

namespace bimanip {

/// Axis-aligned voxel grid over a world-frame box. Values are the best
/// penalized manipulability found per voxel, normalized to [0, 1].
struct ReachabilityMap {
  Eigen::Vector3d box_min{Eigen::Vector3d::Zero()};
  Eigen::Vector3d box_max{Eigen::Vector3d::Zero()};
  double resolution = 0.05;  ///< [m]
  Eigen::Vector3i dims{Eigen::Vector3i::Zero()};
  std::vector<double> values;       ///< normalized, row-major x fastest
  double normalization = 1.0;       ///< raw max used for normalization

  int index(int ix, int iy, int iz) const {
    return ix + dims.x() * (iy + dims.y() * iz);
  }
  Eigen::Vector3d center(int ix, int iy, int iz) const;
  double voxelVolume() const { return std::pow(resolution, 3); }
  /// Nearest-voxel lookup; 0 outside the box.
  double sample(const Eigen::Vector3d& p) const;
};

struct BimanualObjective {
  double alpha = 0.5;  ///< weight on the coverage (union) score
  double beta = 0.5;   ///< weight on the shared-dexterity (overlap) score
  double d_min = 0.6;  ///< [m]
  double d_max = 1.6;  ///< [m]
  double step = 0.02;  ///< [m]

  void validate() const;
};

struct ReachabilityConfig {
  Eigen::Vector3d box_min{-0.9, -0.9, 0.0};
  Eigen::Vector3d box_max{0.9, 0.9, 1.0};
  double resolution = 0.05;         ///< [m]
  int orientation_samples = 6;      ///< axis-aligned approach directions
  int ik_seeds = 2;                 ///< IK restarts per orientation
  double reachable_threshold = 1e-6;
};

struct DistanceScanRow {
  double d = 0.0;
  double union_volume = 0.0;        ///< [m^3]
  double intersection_volume = 0.0; ///< [m^3]
  double objective = 0.0;
};

struct DistanceScanResult {
  double best_distance = 0.0;
  double best_objective = 0.0;
  std::vector<DistanceScanRow> table;
};

/// Yoshikawa manipulability w = sqrt(det(J J^T)).
double yoshikawa_index(const Eigen::MatrixXd& J);

/// Joint-limit penalty, >= n with equality at the limit midpoints; diverges
/// at the limits. Throws std::domain_error at or beyond a limit.
double joint_limit_penalty(const Eigen::VectorXd& q,
                           const std::vector<JointSpec>& joints);

/// Penalized manipulability w* = w / P(q).
double modified_index(const ManipulatorModel& model, const Eigen::VectorXd& q);

/// Voxelized reachability of one arm; deterministic per seed regardless of
/// evaluation order (per-voxel seeds derived from the voxel index).
ReachabilityMap reachability_map(const ManipulatorModel& model,
                                 const ReachabilityConfig& config,
                                 std::uint64_t seed);

/// Union and intersection volumes of two maps on identical grids.
std::pair<double, double> bimanual_volumes(const ReachabilityMap& a,
                                           const ReachabilityMap& b,
                                           double threshold);

/// Exhaustive scan over base separations d. The second arm faces the first
/// (rotated pi about z, offset d along x); its map is derived from the
/// canonical single-arm map by resampling. The objective per candidate is
/// alpha * coverage + beta * peak joint quality, both normalized over the
/// scan; ties resolve to the largest separation. The emitted table carries
/// the thresholded union/intersection volumes alongside the objective.
DistanceScanResult optimize_base_distance(const ManipulatorModel& model,
                                          const BimanualObjective& objective,
                                          const ReachabilityConfig& config,
                                          std::uint64_t seed);

/// CSV: d, union, intersection, objective.
void export_scan_csv(const DistanceScanResult& scan, std::ostream& out);
/// Voxel dump: x, y, z, value.
void export_map_csv(const ReachabilityMap& map, std::ostream& out);

}  // namespace bimanip

#endif
