#ifndef BIMANIP_TASK_HPP
#define BIMANIP_TASK_HPP

#include "bimanip/primitives.hpp"

#include <iosfwd>

namespace bimanip {

/// Peg-in-hole difficulty in bits: log2(d_H / (d_H - d_P)).
/// Arguments in any consistent length unit. Throws std::domain_error when
/// d_P >= d_H or d_P < 0.
double precision_index(double hole_diameter, double peg_diameter);

/// Full description of the bimanual pin-insertion scenario.
struct Scenario {
  double arm_distance = 1.0;  ///< base separation d [m]
  double table_top = 0.0;     ///< surface height [m]

  // Stick: box with one hole centered on the top face.
  Eigen::Vector3d stick_extents{0.27, 0.05, 0.02};  ///< local x/y/z [m]
  double hole_diameter = 8.1e-3;   ///< d_H [m]
  double hole_depth = 15e-3;       ///< [m]
  Pose stick_start;                ///< on the table, near the right arm
  Pose stick_insertion_pose;       ///< held pose during insertion

  double pin_radius = 4e-3;        ///< [m]
  double pin_length = 30e-3;       ///< [m]
  Pose pin_start;                  ///< standing on the table, near left arm

  NoiseModel noise;
  std::uint64_t seed = 0;

  // Controller / contact model.
  double kp = 1e-5;               ///< [m/N]
  double kv = 0.0;                ///< [m s/N]
  double contact_stiffness = 1e4; ///< [N/m]
  double contact_force = 5.0;     ///< exploration / grasp hold [N]
  double insertion_force = 10.0;  ///< [N]

  // Strategy switches.
  bool exploration = true;
  bool compliant_grasp = true;
  bool check_reachability = true;
  double lateral_offset = 0.0;  ///< injected hole-position error [m]
  double pin_z_offset = 0.0;    ///< injected perceived pin height error [m]

  // Insertion engagement model: the pin enters fully when the lateral error
  // is below clearance + chamfer; within catch_radius it only tips in by
  // partial_drop (enough to detect, not to insert).
  double engagement_chamfer = 0.45e-3;  ///< [m], 0 = strict clearance
  double partial_drop = 4e-3;           ///< [m]

  double finger_length = 0.15;  ///< flange to open fingertip [m]
  double edge_probe_offset = 0.02;  ///< edge crossings at hole_x -+ this [m]

  double clearance() const { return 0.5 * (hole_diameter - 2.0 * pin_radius); }
  double engageRadius() const { return clearance() + engagement_chamfer; }
  double catchRadius() const { return pin_radius; }

  void validate() const;
};

Scenario default_scenario();
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

struct TaskReport {
  bool success = false;
  std::string failure_stage;  ///< empty on success
  std::string failure_reason;
  std::vector<PrimitiveLog> timeline;
  double duration_s = 0.0;
  double final_pin_error_mm = 0.0;  ///< pin axis to hole axis, lateral
  std::optional<Eigen::Vector3d> hole_estimate;
  std::vector<Eigen::Vector3d> edges_found;
};

/// Execution state threaded through the three sub-tasks.
struct TaskRun {
  Scenario scenario;
  WorldState world;
  SimContext ctx;
  ManipulatorModel left_model;
  ManipulatorModel right_model;
  Rng rng;

  Eigen::Vector3d true_hole_center() const;   ///< world frame, top of stick
  Pose perceive(const Pose& true_pose);       ///< draws perception noise
};

/// Sets up arms, objects, perception and the contact surface model.
TaskRun make_task_run(const Scenario& scenario);

void run_compliant_grasp(TaskRun& run);
void run_pick_and_place(TaskRun& run);
/// Returns the hole-center estimate produced by exploration (or the
/// perceived position when exploration is disabled).
Eigen::Vector3d run_compliant_insertion(TaskRun& run, TaskReport& report);

TaskReport run_full_task(const Scenario& scenario);

struct MonteCarloStats {
  int runs = 0;
  int successes = 0;
  std::map<std::string, int> failure_stages;
  std::vector<double> hole_error_mm;  ///< successful runs only
  double success_rate() const {
    return runs > 0 ? static_cast<double>(successes) / runs : 0.0;
  }
};

MonteCarloStats evaluate_monte_carlo(const Scenario& scenario, int n_runs,
                                     std::uint64_t seed);

/// Timeline CSV: start_s, end_s, primitive, arm, action, outcome.
void export_timeline_csv(const std::vector<PrimitiveLog>& timeline,
                         std::ostream& out);
void save_report_json(const TaskReport& report, const std::string& path);

}  // namespace bimanip

#endif
