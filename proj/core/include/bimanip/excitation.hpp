#ifndef BIMANIP_EXCITATION_HPP
#define BIMANIP_EXCITATION_HPP

#include "bimanip/model.hpp"

#include <iosfwd>

namespace bimanip {

/// Harmonic-series excitation trajectory: per joint j,
///   q_j(t)   = sum_k a_jk/(w_f k) sin(w_f k t) - b_jk/(w_f k) cos(w_f k t) + q0_j
///   qd_j(t)  = sum_k a_jk cos(w_f k t) + b_jk sin(w_f k t)
///   qdd_j(t) = sum_k -a_jk w_f k sin(w_f k t) + b_jk w_f k cos(w_f k t)
/// giving 2N+1 free parameters per joint.
struct ExcitationParams {
  Eigen::MatrixXd a;       ///< n x N sine amplitudes [rad/s]
  Eigen::MatrixXd b;       ///< n x N cosine amplitudes [rad/s]
  Eigen::VectorXd offset;  ///< q0 per joint [rad]
  double base_frequency = 2.0 * M_PI * 0.1;  ///< w_f [rad/s]

  int dof() const { return static_cast<int>(a.rows()); }
  int harmonics() const { return static_cast<int>(a.cols()); }
  double period() const { return 2.0 * M_PI / base_frequency; }

  static ExcitationParams Zero(int dof, int harmonics, double w_f);
  void validate() const;
};

struct TrajectorySample {
  double t = 0.0;
  JointState state;
};

/// Per-joint constraint margins from sampling one period.
struct ConstraintReport {
  struct JointEntry {
    double max_position_excursion = 0.0;  ///< max |q - mid| [rad]
    double position_allowance = 0.0;      ///< half range minus safety margin
    double max_velocity = 0.0;
    double velocity_limit = 0.0;
    double max_acceleration = 0.0;
    double acceleration_limit = 0.0;
    bool pass = false;
  };
  std::vector<JointEntry> joints;
  bool pass = false;
};

struct ExcitationOptimizerConfig {
  int multistarts = 20;
  int pattern_iterations = 40;
  int gamma_samples = 200;       ///< sample times for the information matrix
  int constraint_grid = 1000;    ///< samples per period for feasibility
  double safety_margin = 0.05;   ///< limits deflated by this fraction
  double initial_step = 0.25;    ///< pattern-search step, fraction of scale
  double min_step = 1e-3;
};

class InfeasibleExcitation : public std::runtime_error {
public:
  explicit InfeasibleExcitation(const std::string& what)
      : std::runtime_error(what) {}
};

JointState eval_trajectory(const ExcitationParams& params, double t);

ConstraintReport check_constraints(const ExcitationParams& params,
                                   const ManipulatorModel& model,
                                   int grid_points = 1000,
                                   double safety_margin = 0.05);

/// Information matrix of the stacked augmented regressor along the
/// trajectory: Gamma = sum_t A*(t)^T A*(t), 16x16 PSD.
Eigen::MatrixXd information_matrix(const ExcitationParams& params,
                                   const ManipulatorModel& model,
                                   const std::vector<double>& sample_times,
                                   const Eigen::Vector3d& gravity = {0.0, 0.0,
                                                                     -9.80665});

double log_det_information(const ExcitationParams& params,
                           const ManipulatorModel& model, int n_samples = 200);

/// Draws a constraint-feasible random parameter set (amplitudes scaled to
/// the velocity/acceleration/position budgets).
ExcitationParams random_feasible_params(const ManipulatorModel& model, int N,
                                        double w_f, Rng& rng,
                                        double safety_margin = 0.05);

/// Maximizes log det(Gamma) by random multistart plus pattern search with
/// hard rejection of infeasible candidates. Deterministic per seed.
ExcitationParams optimize_excitation(
    const ManipulatorModel& model, int N, double w_f, int budget,
    std::uint64_t seed, const ExcitationOptimizerConfig& config = {});

/// CSV export: t, q1..qn, qd1..qdn, qdd1..qddn over one period.
void export_trajectory_csv(const ExcitationParams& params, std::ostream& out,
                           int n_samples = 500);

void save_excitation_params(const ExcitationParams& params,
                            const std::string& path);
ExcitationParams load_excitation_params(const std::string& path);

}  // namespace bimanip

#endif
