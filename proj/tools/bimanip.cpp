// Command-line front-end: reproducible, file-based experiment runner.
// Every invocation writes its outputs plus a manifest.json into --out.

#include "CLI11.hpp"
#include "bimanip/excitation.hpp"
#include "bimanip/identification.hpp"
#include "bimanip/planner.hpp"
#include "bimanip/task.hpp"
#include "bimanip/workspace.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bimanip;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitDomainFailure = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

struct Manifest {
  std::string command;
  std::vector<std::string> config_paths;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  double wall_time_s = 0.0;
  json extra;
};

void write_manifest(const Manifest& m, const fs::path& out_dir) {
  json j;
  j["command"] = m.command;
  j["configs"] = m.config_paths;
  j["seed"] = m.seed;
  j["tool_version"] = kVersion;
  j["outputs"] = m.outputs;
  j["wall_time_s"] = m.wall_time_s;
  if (!m.extra.is_null()) j["results"] = m.extra;
  std::ofstream out(out_dir / "manifest.json");
  out << j.dump(2) << "\n";
}

ManipulatorModel load_robot(const std::string& config) {
  if (config.empty()) return reference_manipulator();
  return load_model(config);
}

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir = out.empty() ? fs::path("out") : fs::path(out);
  fs::create_directories(dir);
  return dir;
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& fn, Manifest& manifest) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  fn(out);
  manifest.outputs.push_back(path.string());
}

// ----------------------------------------------------------- workspace

struct WorkspaceArgs {
  std::string robot_config, out = "out";
  double alpha = 0.5, beta = 0.5;
  double d_min = 0.6, d_max = 1.6, step = 0.02;
  double resolution = 0.05;
  std::uint64_t seed = 0;
  bool dump_maps = false;
};

int cmd_workspace(const WorkspaceArgs& args) {
  if (args.d_min > args.d_max)
    throw UsageError("workspace: d-min must not exceed d-max");
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out_dir = prepare_out_dir(args.out);
  Manifest manifest;
  manifest.command = "workspace";
  manifest.seed = args.seed;
  if (!args.robot_config.empty())
    manifest.config_paths.push_back(args.robot_config);

  ManipulatorModel model = load_robot(args.robot_config);
  model.validate();

  BimanualObjective objective;
  objective.alpha = args.alpha;
  objective.beta = args.beta;
  objective.d_min = args.d_min;
  objective.d_max = args.d_max;
  objective.step = args.step;
  objective.validate();

  ReachabilityConfig config;
  config.resolution = args.resolution;

  const DistanceScanResult scan =
      optimize_base_distance(model, objective, config, args.seed);
  write_file(out_dir / "distance_scan.csv",
             [&](std::ostream& o) { export_scan_csv(scan, o); }, manifest);
  if (args.dump_maps) {
    const ReachabilityMap map = reachability_map(model, config, args.seed);
    write_file(out_dir / "reachability_map.csv",
               [&](std::ostream& o) { export_map_csv(map, o); }, manifest);
  }

  manifest.extra = {{"best_distance_m", scan.best_distance},
                    {"best_objective", scan.best_objective},
                    {"alpha", args.alpha},
                    {"beta", args.beta}};
  manifest.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_manifest(manifest, out_dir);
  std::cout << "optimal base distance: " << scan.best_distance << " m"
            << " (objective " << scan.best_objective << ")\n";
  return kExitOk;
}

// -------------------------------------------------------------- excite

struct ExciteArgs {
  std::string robot_config, out = "out";
  int harmonics = 5;
  double frequency_hz = 0.1;
  int budget = 4000;
  std::uint64_t seed = 0;
};

int cmd_excite(const ExciteArgs& args) {
  if (args.harmonics < 1)
    throw UsageError("excite: harmonics must be >= 1");
  if (args.frequency_hz <= 0.0)
    throw UsageError("excite: frequency must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out_dir = prepare_out_dir(args.out);
  Manifest manifest;
  manifest.command = "excite";
  manifest.seed = args.seed;
  if (!args.robot_config.empty())
    manifest.config_paths.push_back(args.robot_config);

  ManipulatorModel model = load_robot(args.robot_config);
  model.validate();

  const double w_f = 2.0 * M_PI * args.frequency_hz;
  const ExcitationParams params =
      optimize_excitation(model, args.harmonics, w_f, args.budget, args.seed);

  const fs::path params_path = out_dir / "excitation_params.json";
  save_excitation_params(params, params_path.string());
  manifest.outputs.push_back(params_path.string());
  write_file(out_dir / "trajectory.csv",
             [&](std::ostream& o) { export_trajectory_csv(params, o); },
             manifest);

  manifest.extra = {
      {"parameters_per_joint", 2 * args.harmonics + 1},
      {"log_det_information", log_det_information(params, model)},
      {"period_s", params.period()}};
  manifest.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_manifest(manifest, out_dir);
  std::cout << "optimized excitation: " << 2 * args.harmonics + 1
            << " parameters per joint, log det = "
            << log_det_information(params, model) << "\n";
  return kExitOk;
}

// ------------------------------------------------------------ identify

struct IdentifyArgs {
  std::string robot_config, out = "out";
  std::string samples_csv;  ///< when set, ingest instead of synthesizing
  double noise_n = 0.0;
  int n_samples = 400;
  std::uint64_t seed = 0;
};

std::vector<WrenchSample> read_samples_csv(const std::string& path, int dof) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open samples file: " + path);
  std::vector<WrenchSample> samples;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first && line.find_first_not_of("0123456789+-.eE, \t") !=
                     std::string::npos) {
      first = false;
      continue;  // header row
    }
    first = false;
    std::stringstream ss(line);
    std::vector<double> row;
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    const std::size_t expect = 1 + 3 * dof + 6;
    if (row.size() != expect)
      throw ConfigError(path + ": expected " + std::to_string(expect) +
                        " columns, got " + std::to_string(row.size()));
    WrenchSample s;
    s.timestamp = row[0];
    s.state.q = Eigen::VectorXd(dof);
    s.state.qd = Eigen::VectorXd(dof);
    s.state.qdd = Eigen::VectorXd(dof);
    for (int j = 0; j < dof; ++j) {
      s.state.q[j] = row[1 + j];
      s.state.qd[j] = row[1 + dof + j];
      s.state.qdd[j] = row[1 + 2 * dof + j];
    }
    s.measured.force = {row[1 + 3 * dof], row[2 + 3 * dof], row[3 + 3 * dof]};
    s.measured.torque = {row[4 + 3 * dof], row[5 + 3 * dof], row[6 + 3 * dof]};
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw ConfigError(path + ": no samples");
  return samples;
}

int cmd_identify(const IdentifyArgs& args) {
  if (args.noise_n < 0.0) throw UsageError("identify: noise must be >= 0");
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out_dir = prepare_out_dir(args.out);
  Manifest manifest;
  manifest.command = "identify";
  manifest.seed = args.seed;
  if (!args.robot_config.empty())
    manifest.config_paths.push_back(args.robot_config);

  ManipulatorModel model = load_robot(args.robot_config);
  model.validate();

  InertialParams truth;
  std::vector<WrenchSample> samples;
  bool synthetic = args.samples_csv.empty();
  if (synthetic) {
    // Synthetic gripper-like body plus sensor offsets, observed along an
    // excitation trajectory.
    truth.mass = 1.2;
    truth.first_moment = truth.mass * Eigen::Vector3d(0.005, -0.003, 0.06);
    truth.inertia << 8e-3, 1e-4, -2e-4, 7e-3, 5e-5, 3e-3;
    truth.force_offset = {1.5, -2.0, 3.2};
    truth.torque_offset = {0.08, -0.05, 0.11};

    Rng rng(args.seed);
    ExcitationParams traj =
        random_feasible_params(model, 5, 2.0 * M_PI * 0.1, rng);
    std::normal_distribution<double> gauss(0.0, args.noise_n);
    for (int i = 0; i < args.n_samples; ++i) {
      const double t = traj.period() * i / args.n_samples;
      WrenchSample s;
      s.timestamp = t;
      s.state = eval_trajectory(traj, t);
      const SensorKinematics kin =
          sensor_kinematics(model, s.state, {0.0, 0.0, -9.80665});
      s.measured = predicted_wrench(kin, truth);
      if (args.noise_n > 0.0) {
        for (int k = 0; k < 3; ++k) s.measured.force[k] += gauss(rng);
      }
      samples.push_back(std::move(s));
    }
  } else {
    manifest.config_paths.push_back(args.samples_csv);
    samples = read_samples_csv(args.samples_csv, model.dof());
  }

  try {
    auto [estimate, report] = estimate_parameters(samples, model);
    json j;
    j["parameters"] = {
        {"force_offset_n", {estimate.force_offset.x(), estimate.force_offset.y(),
                            estimate.force_offset.z()}},
        {"torque_offset_nm",
         {estimate.torque_offset.x(), estimate.torque_offset.y(),
          estimate.torque_offset.z()}},
        {"mass_kg", estimate.mass},
        {"first_moment_kgm",
         {estimate.first_moment.x(), estimate.first_moment.y(),
          estimate.first_moment.z()}},
        {"inertia_kgm2", std::vector<double>(estimate.inertia.data(),
                                             estimate.inertia.data() + 6)}};
    j["fit"] = {{"residual_rms_n", report.residual_rms},
                {"condition_number", report.condition_number},
                {"rank", report.rank},
                {"mass_physical", report.mass_physical}};
    if (synthetic) {
      const double rel = (estimate.vector() - truth.vector()).norm() /
                         truth.vector().norm();
      j["relative_error"] = rel;
    }
    std::ofstream out(out_dir / "identification_report.json");
    out << j.dump(2) << "\n";
    manifest.outputs.push_back((out_dir / "identification_report.json").string());
    manifest.extra = j["fit"];
    std::cout << "identified mass " << estimate.mass
              << " kg, residual RMS " << report.residual_rms << " N\n";
  } catch (const RankDeficiencyError& e) {
    std::cerr << "identification failed: " << e.what() << "\n"
              << "hint: " << e.deficiency
              << " parameter directions are unexcited; use a dynamic"
                 " excitation trajectory covering accelerations and"
                 " orientations\n";
    manifest.extra = {{"error", e.what()}, {"rank_deficiency", e.deficiency}};
    manifest.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_manifest(manifest, out_dir);
    return kExitDomainFailure;
  }

  manifest.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_manifest(manifest, out_dir);
  return kExitOk;
}

// ---------------------------------------------------------------- task

struct TaskArgs {
  std::string scenario_config, out = "out";
  int runs = 1;
  int jobs = 1;
  std::uint64_t seed = 0;
  double noise_mm = -1.0;  ///< < 0 = keep scenario value
  double offset_mm = 0.0;
  bool no_exploration = false;
};

int cmd_task(const TaskArgs& args) {
  if (args.runs < 1) throw UsageError("task: runs must be >= 1");
  if (args.jobs < 1) throw UsageError("task: jobs must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out_dir = prepare_out_dir(args.out);
  Manifest manifest;
  manifest.command = "task";
  manifest.seed = args.seed;

  Scenario scenario = default_scenario();
  if (!args.scenario_config.empty()) {
    scenario = load_scenario(args.scenario_config);
    manifest.config_paths.push_back(args.scenario_config);
  }
  if (args.noise_mm >= 0.0) scenario.noise.position_bound = args.noise_mm * 1e-3;
  if (args.no_exploration) scenario.exploration = false;
  scenario.lateral_offset = args.offset_mm * 1e-3;

  int exit_code = kExitOk;
  if (args.runs == 1) {
    scenario.seed = args.seed;
    const TaskReport report = run_full_task(scenario);
    save_report_json(report, (out_dir / "task_report.json").string());
    manifest.outputs.push_back((out_dir / "task_report.json").string());
    write_file(out_dir / "timeline.csv",
               [&](std::ostream& o) { export_timeline_csv(report.timeline, o); },
               manifest);
    manifest.extra = {{"success", report.success},
                      {"failure_stage", report.failure_stage},
                      {"final_pin_error_mm", report.final_pin_error_mm}};
    if (report.success) {
      std::cout << "task succeeded in " << report.duration_s << " s\n";
    } else {
      std::cout << "task failed at " << report.failure_stage << ": "
                << report.failure_reason << "\n";
      exit_code = kExitDomainFailure;
    }
  } else {
    // Fixed per-run seeds make the aggregate independent of the worker
    // count and schedule.
    std::vector<TaskReport> reports(args.runs);
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int i = next.fetch_add(1); i < args.runs; i = next.fetch_add(1)) {
        Scenario s = scenario;
        s.seed = args.seed * 0x9e3779b97f4a7c15ULL +
                 static_cast<std::uint64_t>(i);
        reports[i] = run_full_task(s);
      }
    };
    std::vector<std::thread> pool;
    const int n_workers = std::min(args.jobs, args.runs);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    MonteCarloStats stats;
    stats.runs = args.runs;
    for (const auto& r : reports) {
      if (r.success) {
        ++stats.successes;
        stats.hole_error_mm.push_back(r.final_pin_error_mm);
      } else {
        ++stats.failure_stages[r.failure_stage];
      }
    }
    json j;
    j["runs"] = stats.runs;
    j["successes"] = stats.successes;
    j["success_rate"] = stats.success_rate();
    j["failure_stages"] = stats.failure_stages;
    std::ofstream out(out_dir / "stats.json");
    out << j.dump(2) << "\n";
    manifest.outputs.push_back((out_dir / "stats.json").string());
    manifest.extra = j;
    std::cout << "success rate " << stats.success_rate() << " over "
              << stats.runs << " runs\n";
    if (stats.successes == 0) exit_code = kExitDomainFailure;
  }

  manifest.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_manifest(manifest, out_dir);
  return exit_code;
}

// ---------------------------------------------------------------- plan

struct PlanArgs {
  std::string robot_config, out = "out";
  std::uint64_t seed = 0;
  std::vector<double> start, goal;
};

int cmd_plan(const PlanArgs& args) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out_dir = prepare_out_dir(args.out);
  Manifest manifest;
  manifest.command = "plan";
  manifest.seed = args.seed;
  if (!args.robot_config.empty())
    manifest.config_paths.push_back(args.robot_config);

  ManipulatorModel model = load_robot(args.robot_config);
  model.validate();
  const int n = model.dof();
  if (!args.start.empty() && static_cast<int>(args.start.size()) != n)
    throw UsageError("plan: --start needs " + std::to_string(n) + " values");
  if (!args.goal.empty() && static_cast<int>(args.goal.size()) != n)
    throw UsageError("plan: --goal needs " + std::to_string(n) + " values");

  Eigen::VectorXd start = model.midConfiguration();
  Eigen::VectorXd goal = model.midConfiguration();
  for (std::size_t j = 0; j < args.start.size(); ++j) start[j] = args.start[j];
  for (std::size_t j = 0; j < args.goal.size(); ++j) goal[j] = args.goal[j];
  if (args.goal.empty()) goal[0] += 1.0;  // default demo query

  CollisionScene scene;
  scene.robot = &model;
  try {
    const JointPath path =
        rrt_connect(scene, start, goal, PlannerParams{}, args.seed);
    write_file(out_dir / "path.csv",
               [&](std::ostream& o) { export_path_csv(path, o); }, manifest);
    manifest.extra = {{"waypoints", path.waypoints.size()}};
    std::cout << "planned path with " << path.waypoints.size()
              << " waypoints\n";
  } catch (const PlanningError& e) {
    std::cerr << "planning failed: " << e.what() << "\n";
    manifest.extra = {{"error", e.what()}};
    manifest.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_manifest(manifest, out_dir);
    return kExitDomainFailure;
  }

  manifest.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_manifest(manifest, out_dir);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bimanual fine-assembly simulation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  WorkspaceArgs wa;
  auto* ws = app.add_subcommand("workspace",
                                "optimize the base distance of two facing arms");
  ws->add_option("--config", wa.robot_config, "robot description JSON");
  ws->add_option("--out", wa.out, "output directory");
  ws->add_option("--seed", wa.seed, "RNG seed");
  ws->add_option("--alpha", wa.alpha, "weight on union workspace volume");
  ws->add_option("--beta", wa.beta, "weight on intersection volume");
  ws->add_option("--d-min", wa.d_min, "minimum base distance [m]");
  ws->add_option("--d-max", wa.d_max, "maximum base distance [m]");
  ws->add_option("--d-step", wa.step, "scan step [m]");
  ws->add_option("--resolution", wa.resolution, "voxel size [m]");
  ws->add_flag("--dump-maps", wa.dump_maps, "also write the voxel map CSV");

  ExciteArgs ea;
  auto* ex = app.add_subcommand("excite",
                                "optimize a d-optimal excitation trajectory");
  ex->add_option("--config", ea.robot_config, "robot description JSON");
  ex->add_option("--out", ea.out, "output directory");
  ex->add_option("--seed", ea.seed, "RNG seed");
  ex->add_option("--harmonics", ea.harmonics, "harmonics per joint (N)");
  ex->add_option("--frequency", ea.frequency_hz, "base frequency [Hz]");
  ex->add_option("--budget", ea.budget, "objective evaluation budget");

  IdentifyArgs ia;
  auto* id = app.add_subcommand("identify",
                                "estimate end-effector inertial parameters");
  id->add_option("--config", ia.robot_config, "robot description JSON");
  id->add_option("--out", ia.out, "output directory");
  id->add_option("--seed", ia.seed, "RNG seed");
  id->add_option("--samples", ia.samples_csv,
                 "wrench sample CSV (t, q*, qd*, qdd*, f xyz, tau xyz)");
  id->add_option("--noise", ia.noise_n, "force noise sigma [N], synthetic runs");
  id->add_option("--n-samples", ia.n_samples, "synthetic sample count");

  TaskArgs ta;
  auto* tk = app.add_subcommand("task", "run the bimanual pin-insertion task");
  tk->add_option("--config", ta.scenario_config, "scenario JSON");
  tk->add_option("--out", ta.out, "output directory");
  tk->add_option("--seed", ta.seed, "RNG seed");
  tk->add_option("--runs", ta.runs, "number of Monte-Carlo runs");
  tk->add_option("--jobs", ta.jobs, "worker threads for Monte-Carlo runs");
  tk->add_option("--noise-mm", ta.noise_mm, "perception noise bound [mm]");
  tk->add_option("--offset-mm", ta.offset_mm,
                 "injected lateral hole-position error [mm]");
  tk->add_flag("--no-exploration", ta.no_exploration,
               "insert at the perceived hole position directly");

  PlanArgs pa;
  auto* pl = app.add_subcommand("plan", "single-arm joint-space path query");
  pl->add_option("--config", pa.robot_config, "robot description JSON");
  pl->add_option("--out", pa.out, "output directory");
  pl->add_option("--seed", pa.seed, "RNG seed");
  pl->add_option("--start", pa.start, "start configuration [rad]");
  pl->add_option("--goal", pa.goal, "goal configuration [rad]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ws->parsed()) return cmd_workspace(wa);
    if (ex->parsed()) return cmd_excite(ea);
    if (id->parsed()) return cmd_identify(ia);
    if (tk->parsed()) return cmd_task(ta);
    if (pl->parsed()) return cmd_plan(pa);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InfeasibleExcitation& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitDomainFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomainFailure;
  }
  return kExitUsage;
}
