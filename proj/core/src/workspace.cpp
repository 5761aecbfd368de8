#include "bimanip/workspace.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <ostream>

namespace bimanip {

Eigen::Vector3d ReachabilityMap::center(int ix, int iy, int iz) const {
  return box_min + resolution * Eigen::Vector3d(ix + 0.5, iy + 0.5, iz + 0.5);
}

double ReachabilityMap::sample(const Eigen::Vector3d& p) const {
  Eigen::Vector3d rel = (p - box_min) / resolution;
  const int ix = static_cast<int>(std::floor(rel.x()));
  const int iy = static_cast<int>(std::floor(rel.y()));
  const int iz = static_cast<int>(std::floor(rel.z()));
  if (ix < 0 || iy < 0 || iz < 0 || ix >= dims.x() || iy >= dims.y() ||
      iz >= dims.z())
    return 0.0;
  return values[index(ix, iy, iz)];
}

void BimanualObjective::validate() const {
  if (alpha < 0.0 || beta < 0.0 || alpha + beta <= 0.0)
    throw std::invalid_argument("objective weights must be >= 0, not both 0");
  if (!(d_min < d_max))
    throw std::invalid_argument("objective: d_min must be < d_max");
  if (step <= 0.0) throw std::invalid_argument("objective: step must be > 0");
}

double yoshikawa_index(const Eigen::MatrixXd& J) {
  const Eigen::MatrixXd JJt = J * J.transpose();
  const double det = JJt.determinant();
  return det > 0.0 ? std::sqrt(det) : 0.0;
}

double joint_limit_penalty(const Eigen::VectorXd& q,
                           const std::vector<JointSpec>& joints) {
  if (q.size() != static_cast<Eigen::Index>(joints.size()))
    throw std::invalid_argument("joint_limit_penalty: size mismatch");
  double penalty = 0.0;
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    const double lo = joints[j].lower;
    const double hi = joints[j].upper;
    if (q[j] <= lo || q[j] >= hi)
      throw std::domain_error("joint_limit_penalty: q at or beyond limit " +
                              std::to_string(j + 1));
    const double range = hi - lo;
    penalty += range * range / (4.0 * (hi - q[j]) * (q[j] - lo));
  }
  return penalty;
}

double modified_index(const ManipulatorModel& model, const Eigen::VectorXd& q) {
  const double w = yoshikawa_index(jacobian(model, q));
  if (w == 0.0) return 0.0;
  return w / joint_limit_penalty(q, model.joints);
}

namespace {

// Tool z axis along each of the axis-aligned directions.
Eigen::Quaterniond approach_orientation(int k) {
  static const Eigen::Vector3d dirs[6] = {
      {0, 0, -1}, {0, 0, 1}, {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
  return Eigen::Quaterniond::FromTwoVectors(Eigen::Vector3d::UnitZ(),
                                            dirs[k % 6]);
}

double reach_radius(const ManipulatorModel& model) {
  double r = model.sensor_offset.position.norm();
  for (const auto& j : model.joints) r += j.origin.position.norm();
  return r;
}

}  // namespace

ReachabilityMap reachability_map(const ManipulatorModel& model,
                                 const ReachabilityConfig& config,
                                 std::uint64_t seed) {
  if (config.resolution <= 0.0)
    throw std::invalid_argument("reachability_map: resolution must be > 0");

  ReachabilityMap map;
  map.box_min = config.box_min;
  map.box_max = config.box_max;
  map.resolution = config.resolution;
  for (int i = 0; i < 3; ++i)
    map.dims[i] = std::max(
        1, static_cast<int>(std::ceil(
               (config.box_max[i] - config.box_min[i]) / config.resolution)));
  map.values.assign(static_cast<std::size_t>(map.dims.prod()), 0.0);

  const double reach = reach_radius(model);
  const Eigen::Vector3d base = model.base_pose.position;
  IkParams ik;
  ik.max_iterations = 80;
  ik.position_tol = 1e-4;
  ik.orientation_tol = 1e-3;
  const Eigen::VectorXd mid = model.midConfiguration();

  double raw_max = 0.0;
  for (int iz = 0; iz < map.dims.z(); ++iz) {
    for (int iy = 0; iy < map.dims.y(); ++iy) {
      for (int ix = 0; ix < map.dims.x(); ++ix) {
        const Eigen::Vector3d p = map.center(ix, iy, iz);
        if ((p - base).norm() > reach) continue;
        // Per-voxel RNG keeps the result independent of evaluation order.
        Rng rng(seed ^ (0x9e3779b97f4a7c15ULL *
                        (static_cast<std::uint64_t>(map.index(ix, iy, iz)) + 1)));
        std::uniform_real_distribution<double> jitter(-0.3, 0.3);
        double best = 0.0;
        for (int o = 0; o < config.orientation_samples; ++o) {
          Pose target;
          target.position = p;
          target.orientation = approach_orientation(o);
          for (int s = 0; s < config.ik_seeds; ++s) {
            Eigen::VectorXd q0 = mid;
            if (s > 0)
              for (int j = 0; j < model.dof(); ++j)
                q0[j] += jitter(rng) * model.joints[j].range() * 0.5;
            try {
              Eigen::VectorXd q = inverse_kinematics(model, target, q0, ik);
              if (model.withinLimits(q, 1e-6))
                best = std::max(best, modified_index(model, q));
            } catch (const IkError&) {
            } catch (const std::domain_error&) {
            }
          }
        }
        map.values[map.index(ix, iy, iz)] = best;
        raw_max = std::max(raw_max, best);
      }
    }
  }

  map.normalization = raw_max > 0.0 ? raw_max : 1.0;
  for (double& v : map.values) v /= map.normalization;
  return map;
}

std::pair<double, double> bimanual_volumes(const ReachabilityMap& a,
                                           const ReachabilityMap& b,
                                           double threshold) {
  if (a.dims != b.dims || (a.box_min - b.box_min).norm() > 1e-12 ||
      std::abs(a.resolution - b.resolution) > 1e-12)
    throw std::invalid_argument("bimanual_volumes: grid mismatch");
  std::size_t n_union = 0, n_inter = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const bool ra = a.values[i] > threshold;
    const bool rb = b.values[i] > threshold;
    n_union += (ra || rb);
    n_inter += (ra && rb);
  }
  const double vv = a.voxelVolume();
  return {n_union * vv, n_inter * vv};
}

DistanceScanResult optimize_base_distance(const ManipulatorModel& model,
                                          const BimanualObjective& objective,
                                          const ReachabilityConfig& config,
                                          std::uint64_t seed) {
  objective.validate();

  // One canonical map; the facing arm's reachability is the same map rotated
  // pi about z and shifted by d, so every candidate reuses it by resampling.
  ReachabilityMap canonical = reachability_map(model, config, seed);

  // The binary union/intersection volumes alone cannot rank candidates when
  // alpha == beta: their sum is identically |A| + |B| for any d, and every
  // integral overlap measure of two facing maps is monotone in d. The ranking
  // objective therefore combines coverage (sum of max normalized values) with
  // the peak joint quality (best min of the two values over the grid, the
  // dexterity available at a shared working point), each normalized over the
  // scan. The plain thresholded volumes are still emitted per row.
  DistanceScanResult result;
  std::vector<double> union_q, inter_q;
  for (double d = objective.d_min; d <= objective.d_max + 1e-9;
       d += objective.step) {
    ReachabilityMap a, b;
    a.box_min = config.box_min;
    a.box_max = config.box_max;
    a.box_max.x() = d - config.box_min.x();
    a.resolution = config.resolution;
    for (int i = 0; i < 3; ++i)
      a.dims[i] = std::max(
          1, static_cast<int>(
                 std::ceil((a.box_max[i] - a.box_min[i]) / a.resolution)));
    a.values.assign(static_cast<std::size_t>(a.dims.prod()), 0.0);
    b = a;
    for (int iz = 0; iz < a.dims.z(); ++iz)
      for (int iy = 0; iy < a.dims.y(); ++iy)
        for (int ix = 0; ix < a.dims.x(); ++ix) {
          const Eigen::Vector3d p = a.center(ix, iy, iz);
          a.values[a.index(ix, iy, iz)] = canonical.sample(p);
          // Second arm: rotate pi about z around its base at (d, 0, 0).
          const Eigen::Vector3d pm(d - p.x(), -p.y(), p.z());
          b.values[b.index(ix, iy, iz)] = canonical.sample(pm);
        }
    auto [u, inter] =
        bimanual_volumes(a, b, config.reachable_threshold);
    const double vv = a.voxelVolume();
    double uq = 0.0, iq = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      uq += std::max(a.values[i], b.values[i]) * vv;
      iq = std::max(iq, std::min(a.values[i], b.values[i]));
    }
    union_q.push_back(uq);
    inter_q.push_back(iq);
    DistanceScanRow row;
    row.d = d;
    row.union_volume = u;
    row.intersection_volume = inter;
    result.table.push_back(row);
  }
  if (result.table.empty())
    throw std::invalid_argument("optimize_base_distance: empty candidate set");

  const double u_max = *std::max_element(union_q.begin(), union_q.end());
  const double i_max = *std::max_element(inter_q.begin(), inter_q.end());
  result.best_objective = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < result.table.size(); ++k) {
    DistanceScanRow& row = result.table[k];
    row.objective = objective.alpha * (u_max > 0.0 ? union_q[k] / u_max : 0.0) +
                    objective.beta * (i_max > 0.0 ? inter_q[k] / i_max : 0.0);
    // Ties resolve to the larger separation (plateaus are common once the
    // workspaces stop interacting).
    if (row.objective >= result.best_objective) {
      result.best_objective = row.objective;
      result.best_distance = row.d;
    }
  }
  return result;
}

void export_scan_csv(const DistanceScanResult& scan, std::ostream& out) {
  out << "d,union,intersection,objective\n";
  for (const auto& row : scan.table)
    out << row.d << "," << row.union_volume << "," << row.intersection_volume
        << "," << row.objective << "\n";
}

void export_map_csv(const ReachabilityMap& map, std::ostream& out) {
  out << "x,y,z,value\n";
  for (int iz = 0; iz < map.dims.z(); ++iz)
    for (int iy = 0; iy < map.dims.y(); ++iy)
      for (int ix = 0; ix < map.dims.x(); ++ix) {
        const Eigen::Vector3d p = map.center(ix, iy, iz);
        out << p.x() << "," << p.y() << "," << p.z() << ","
            << map.values[map.index(ix, iy, iz)] << "\n";
      }
}

}  // namespace bimanip
