#include "bimanip/excitation.hpp"

#include "bimanip/identification.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <ostream>

namespace bimanip {

using nlohmann::json;

ExcitationParams ExcitationParams::Zero(int dof, int harmonics, double w_f) {
  ExcitationParams p;
  p.a = Eigen::MatrixXd::Zero(dof, harmonics);
  p.b = Eigen::MatrixXd::Zero(dof, harmonics);
  p.offset = Eigen::VectorXd::Zero(dof);
  p.base_frequency = w_f;
  return p;
}

void ExcitationParams::validate() const {
  if (base_frequency <= 0.0)
    throw std::invalid_argument("excitation: base frequency must be positive");
  if (harmonics() < 1)
    throw std::invalid_argument("excitation: need at least one harmonic");
  if (b.rows() != a.rows() || b.cols() != a.cols() || offset.size() != a.rows())
    throw std::invalid_argument("excitation: inconsistent parameter shapes");
}

JointState eval_trajectory(const ExcitationParams& params, double t) {
  params.validate();
  const int n = params.dof();
  const int N = params.harmonics();
  const double wf = params.base_frequency;
  JointState s = JointState::Zero(n);
  for (int j = 0; j < n; ++j) {
    double q = params.offset[j], qd = 0.0, qdd = 0.0;
    for (int k = 1; k <= N; ++k) {
      const double wk = wf * k;
      const double a = params.a(j, k - 1);
      const double b = params.b(j, k - 1);
      const double s_ = std::sin(wk * t);
      const double c_ = std::cos(wk * t);
      q += a / wk * s_ - b / wk * c_;
      qd += a * c_ + b * s_;
      qdd += -a * wk * s_ + b * wk * c_;
    }
    s.q[j] = q;
    s.qd[j] = qd;
    s.qdd[j] = qdd;
  }
  return s;
}

ConstraintReport check_constraints(const ExcitationParams& params,
                                   const ManipulatorModel& model,
                                   int grid_points, double safety_margin) {
  params.validate();
  const int n = params.dof();
  if (n != model.dof())
    throw std::invalid_argument("check_constraints: dof mismatch");

  ConstraintReport report;
  report.joints.resize(n);
  const double T = params.period();
  for (int j = 0; j < n; ++j) {
    auto& e = report.joints[j];
    e.position_allowance =
        0.5 * model.joints[j].range() * (1.0 - safety_margin);
    e.velocity_limit = model.joints[j].velocity_limit * (1.0 - safety_margin);
    e.acceleration_limit =
        model.joints[j].acceleration_limit * (1.0 - safety_margin);
  }
  for (int i = 0; i < grid_points; ++i) {
    const double t = T * i / grid_points;
    JointState s = eval_trajectory(params, t);
    for (int j = 0; j < n; ++j) {
      auto& e = report.joints[j];
      e.max_position_excursion =
          std::max(e.max_position_excursion,
                   std::abs(s.q[j] - model.joints[j].midpoint()));
      e.max_velocity = std::max(e.max_velocity, std::abs(s.qd[j]));
      e.max_acceleration = std::max(e.max_acceleration, std::abs(s.qdd[j]));
    }
  }
  report.pass = true;
  for (auto& e : report.joints) {
    e.pass = e.max_position_excursion <= e.position_allowance &&
             e.max_velocity <= e.velocity_limit &&
             e.max_acceleration <= e.acceleration_limit;
    report.pass = report.pass && e.pass;
  }
  return report;
}

Eigen::MatrixXd information_matrix(const ExcitationParams& params,
                                   const ManipulatorModel& model,
                                   const std::vector<double>& sample_times,
                                   const Eigen::Vector3d& gravity) {
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(16, 16);
  for (double t : sample_times) {
    JointState s = eval_trajectory(params, t);
    SensorKinematics kin = sensor_kinematics(model, s, gravity);
    Eigen::Matrix<double, 6, 16> A = augmented_regressor(kin);
    gamma.noalias() += A.transpose() * A;
  }
  // Symmetrize away accumulation noise.
  return 0.5 * (gamma + gamma.transpose());
}

double log_det_information(const ExcitationParams& params,
                           const ManipulatorModel& model, int n_samples) {
  std::vector<double> times(n_samples);
  const double T = params.period();
  for (int i = 0; i < n_samples; ++i) times[i] = T * i / n_samples;
  Eigen::MatrixXd gamma = information_matrix(params, model, times);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gamma);
  double logdet = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double ev = es.eigenvalues()[i];
    if (ev <= 1e-12) return -std::numeric_limits<double>::infinity();
    logdet += std::log(ev);
  }
  return logdet;
}

ExcitationParams random_feasible_params(const ManipulatorModel& model, int N,
                                        double w_f, Rng& rng,
                                        double safety_margin) {
  const int n = model.dof();
  ExcitationParams p = ExcitationParams::Zero(n, N, w_f);
  p.offset = model.midConfiguration();

  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_real_distribution<double> fill(0.3, 0.95);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < N; ++k) {
      p.a(j, k) = coeff(rng);
      p.b(j, k) = coeff(rng);
    }
    // Worst-case bounds for a harmonic sum: sum of per-term amplitudes.
    double vel = 0.0, acc = 0.0, pos = 0.0;
    for (int k = 1; k <= N; ++k) {
      const double amp = std::hypot(p.a(j, k - 1), p.b(j, k - 1));
      vel += amp;
      acc += amp * w_f * k;
      pos += amp / (w_f * k);
    }
    const auto& jt = model.joints[j];
    const double margin = 1.0 - safety_margin;
    double scale = std::min({jt.velocity_limit * margin / vel,
                             jt.acceleration_limit * margin / acc,
                             0.5 * jt.range() * margin / pos});
    scale *= fill(rng);
    p.a.row(j) *= scale;
    p.b.row(j) *= scale;
  }
  return p;
}

ExcitationParams optimize_excitation(const ManipulatorModel& model, int N,
                                     double w_f, int budget,
                                     std::uint64_t seed,
                                     const ExcitationOptimizerConfig& config) {
  if (N < 1) throw std::invalid_argument("optimize_excitation: N must be >= 1");
  if (w_f <= 0.0)
    throw std::invalid_argument("optimize_excitation: w_f must be positive");
  if (budget < 1)
    throw std::invalid_argument("optimize_excitation: budget must be >= 1");

  Rng rng(seed);
  const int n = model.dof();
  int evals_left = budget;

  auto feasible = [&](const ExcitationParams& p) {
    return check_constraints(p, model, config.constraint_grid,
                             config.safety_margin)
        .pass;
  };
  auto objective = [&](const ExcitationParams& p) {
    return log_det_information(p, model, config.gamma_samples);
  };

  ExcitationParams best;
  double best_value = -std::numeric_limits<double>::infinity();
  bool have_best = false;

  const int starts = std::min(config.multistarts, budget);
  std::vector<ExcitationParams> start_points;
  for (int i = 0; i < starts && evals_left > 0; ++i) {
    ExcitationParams cand =
        random_feasible_params(model, N, w_f, rng, config.safety_margin);
    if (!feasible(cand)) continue;  // conservative scaling should prevent this
    --evals_left;
    const double v = objective(cand);
    if (!have_best || v > best_value) {
      best = cand;
      best_value = v;
      have_best = true;
    }
    start_points.push_back(std::move(cand));
  }
  if (!have_best)
    throw InfeasibleExcitation(
        "optimize_excitation: no feasible candidate within budget");

  // Pattern search from the incumbent: coordinate moves over every a, b and
  // offset entry, shrinking the step when no move improves.
  std::vector<double> scales;
  for (int j = 0; j < n; ++j) {
    const double s = model.joints[j].velocity_limit;
    for (int k = 0; k < N; ++k) scales.push_back(s);     // a
    for (int k = 0; k < N; ++k) scales.push_back(s);     // b
    scales.push_back(0.25 * model.joints[j].range());    // offset
  }
  auto coord = [&](ExcitationParams& p, int idx) -> double& {
    const int per_joint = 2 * N + 1;
    const int j = idx / per_joint;
    const int r = idx % per_joint;
    if (r < N) return p.a(j, r);
    if (r < 2 * N) return p.b(j, r - N);
    return p.offset[j];
  };

  double step = config.initial_step;
  for (int iter = 0;
       iter < config.pattern_iterations && step > config.min_step && evals_left > 0;
       ++iter) {
    bool improved = false;
    for (int idx = 0; idx < n * (2 * N + 1) && evals_left > 0; ++idx) {
      for (double sign : {+1.0, -1.0}) {
        if (evals_left <= 0) break;
        ExcitationParams trial = best;
        coord(trial, idx) += sign * step * scales[idx];
        if (!feasible(trial)) continue;
        --evals_left;
        const double v = objective(trial);
        if (v > best_value) {
          best = std::move(trial);
          best_value = v;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

void export_trajectory_csv(const ExcitationParams& params, std::ostream& out,
                           int n_samples) {
  const int n = params.dof();
  out << "t";
  for (int j = 1; j <= n; ++j) out << ",q" << j;
  for (int j = 1; j <= n; ++j) out << ",qd" << j;
  for (int j = 1; j <= n; ++j) out << ",qdd" << j;
  out << "\n";
  const double T = params.period();
  for (int i = 0; i <= n_samples; ++i) {
    const double t = T * i / n_samples;
    JointState s = eval_trajectory(params, t);
    out << t;
    for (int j = 0; j < n; ++j) out << "," << s.q[j];
    for (int j = 0; j < n; ++j) out << "," << s.qd[j];
    for (int j = 0; j < n; ++j) out << "," << s.qdd[j];
    out << "\n";
  }
}

void save_excitation_params(const ExcitationParams& params,
                            const std::string& path) {
  json j;
  j["version"] = 1;
  j["base_frequency"] = params.base_frequency;
  j["harmonics"] = params.harmonics();
  j["a"] = json::array();
  j["b"] = json::array();
  j["offset"] = json::array();
  for (int r = 0; r < params.dof(); ++r) {
    json ra = json::array(), rb = json::array();
    for (int c = 0; c < params.harmonics(); ++c) {
      ra.push_back(params.a(r, c));
      rb.push_back(params.b(r, c));
    }
    j["a"].push_back(ra);
    j["b"].push_back(rb);
    j["offset"].push_back(params.offset[r]);
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write excitation params: " + path);
  out << j.dump(2) << "\n";
}

ExcitationParams load_excitation_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open excitation params: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  const int n = static_cast<int>(j.at("a").size());
  const int N = j.at("harmonics").get<int>();
  ExcitationParams p =
      ExcitationParams::Zero(n, N, j.at("base_frequency").get<double>());
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < N; ++c) {
      p.a(r, c) = j.at("a")[r][c].get<double>();
      p.b(r, c) = j.at("b")[r][c].get<double>();
    }
    p.offset[r] = j.at("offset")[r].get<double>();
  }
  p.validate();
  return p;
}

}  // namespace bimanip
