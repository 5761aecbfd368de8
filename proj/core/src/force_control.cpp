#include "bimanip/force_control.hpp"

#include <cmath>
#include <ostream>

namespace bimanip {

void ForceControllerState::reset() {
  prev_error.setZero();
  filtered_derivative.setZero();
  primed = false;
}

Eigen::Vector3d compensator_step(ForceControllerState& state,
                                 const Eigen::Vector3d& f_r,
                                 const Eigen::Vector3d& f_s) {
  if (state.dt <= 0.0)
    throw std::invalid_argument("compensator_step: dt must be set");
  const Eigen::Vector3d f_e = f_r - f_s;
  Eigen::Vector3d raw = Eigen::Vector3d::Zero();
  if (state.primed) raw = (f_e - state.prev_error) / state.dt;
  const double tau = 1.0 / (2.0 * M_PI * state.derivative_cutoff);
  const double alpha = state.dt / (state.dt + tau);
  state.filtered_derivative += alpha * (raw - state.filtered_derivative);
  state.prev_error = f_e;
  state.primed = true;
  return state.kp.cwiseProduct(f_e) +
         state.kv.cwiseProduct(state.filtered_derivative);
}

Wrench environment_force(const ContactEnvironment& env,
                         const Eigen::Vector3d& tool_position) {
  Wrench w;
  w.frame = "world";
  const double penetration =
      env.surface_height(tool_position) - tool_position.z();
  if (penetration > 0.0) w.force.z() = env.stiffness * penetration;
  return w;
}

LoopTrace simulate_contact_loop(
    ForceControllerState& controller, const ContactEnvironment& env,
    const std::function<Eigen::Vector3d(double)>& x_r,
    const Eigen::Vector3d& f_r, double duration, const LoopConfig& config) {
  if (duration < 10.0 * controller.dt)
    throw std::invalid_argument("simulate_contact_loop: duration too short");

  LoopTrace trace;
  const int steps = static_cast<int>(std::round(duration / controller.dt));
  trace.steps.reserve(steps);

  Eigen::Vector3d x_f_acc = Eigen::Vector3d::Zero();
  Eigen::Vector3d tool = x_r(0.0);
  for (int i = 0; i < steps; ++i) {
    const double t = i * controller.dt;
    const Eigen::Vector3d ref = x_r(t);
    // The sensor reads the force the tool applies to the environment,
    // opposite to the surface reaction.
    const Eigen::Vector3d f_s = -environment_force(env, tool).force;
    x_f_acc += compensator_step(controller, f_r, f_s);
    if (x_f_acc.norm() > config.safety_bound)
      throw ForceLoopError("simulate_contact_loop: divergence at step " +
                           std::to_string(i));
    const Eigen::Vector3d x_c = ref + x_f_acc;
    if (config.tracking_lag > 0.0) {
      const double a = controller.dt / (controller.dt + config.tracking_lag);
      tool += a * (x_c - tool);
    } else {
      tool = x_c;
    }
    trace.steps.push_back(
        {t, ref, x_c, x_f_acc, f_s, f_r - f_s});
  }
  return trace;
}

GuardedMoveResult guarded_move(const ContactEnvironment& env,
                               const Eigen::Vector3d& start,
                               const Eigen::Vector3d& direction, double speed,
                               double stop_force, double max_travel,
                               double dt) {
  if (speed <= 0.0 || dt <= 0.0)
    throw std::invalid_argument("guarded_move: speed and dt must be positive");
  const Eigen::Vector3d dir = direction.normalized();

  GuardedMoveResult result;
  Eigen::Vector3d pos = start;
  double travelled = 0.0;
  double t = 0.0;
  while (travelled <= max_travel) {
    const Eigen::Vector3d f_s = -environment_force(env, pos).force;
    result.trace.steps.push_back(
        {t, pos, pos, Eigen::Vector3d::Zero(), f_s, -f_s});
    if (std::abs(f_s.dot(dir)) >= stop_force && f_s.norm() > 0.0) {
      result.contact_position = pos;
      return result;
    }
    pos += dir * speed * dt;
    travelled += speed * dt;
    t += dt;
  }
  throw ForceLoopError("guarded_move: travel limit reached without contact");
}

void export_trace_csv(const LoopTrace& trace, std::ostream& out) {
  out << "t,xr_x,xr_y,xr_z,xc_x,xc_y,xc_z,xf_x,xf_y,xf_z,"
         "fs_x,fs_y,fs_z,fe_x,fe_y,fe_z\n";
  for (const auto& s : trace.steps) {
    out << s.t;
    for (const auto* v : {&s.x_r, &s.x_c, &s.x_f, &s.f_s, &s.f_e})
      out << "," << v->x() << "," << v->y() << "," << v->z();
    out << "\n";
  }
}

}  // namespace bimanip
