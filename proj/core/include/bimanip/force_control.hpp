#ifndef BIMANIP_FORCE_CONTROL_HPP
#define BIMANIP_FORCE_CONTROL_HPP

#include "bimanip/model.hpp"

#include <functional>
#include <iosfwd>

namespace bimanip {

/// Position-based explicit force compensator. Each step maps the force
/// error f_e = f_r - f_s to a position perturbation
///   x_f = k_p f_e + k_v dfe
/// with the error derivative taken through a first-order low-pass filter.
struct ForceControllerState {
  Eigen::Vector3d kp{1e-5, 1e-5, 1e-5};  ///< [m/N] per axis
  Eigen::Vector3d kv{Eigen::Vector3d::Zero()};  ///< [m s/N] per axis
  double dt = 1e-3;                 ///< [s]
  double derivative_cutoff = 10.0;  ///< [Hz]

  Eigen::Vector3d prev_error{Eigen::Vector3d::Zero()};
  Eigen::Vector3d filtered_derivative{Eigen::Vector3d::Zero()};
  bool primed = false;  ///< first step uses zero derivative

  void reset();
};

/// Linear-spring contact with a horizontal surface: normal (+z) force
/// k_env * penetration, zero out of contact, no tangential force.
struct ContactEnvironment {
  double stiffness = 1e4;  ///< k_env [N/m]
  /// Surface height under a given xy position; constant-height surfaces
  /// just ignore the argument.
  std::function<double(const Eigen::Vector3d&)> surface_height =
      [](const Eigen::Vector3d&) { return 0.0; };
};

struct LoopTrace {
  struct Step {
    double t = 0.0;
    Eigen::Vector3d x_r, x_c, x_f, f_s, f_e;
  };
  std::vector<Step> steps;
};

struct LoopConfig {
  double safety_bound = 0.5;  ///< [m] divergence guard on |x_f|
  /// Plant pole for the inner position loop; 0 = ideal one-step tracking.
  double tracking_lag = 0.0;  ///< [s]
};

class ForceLoopError : public std::runtime_error {
public:
  explicit ForceLoopError(const std::string& what)
      : std::runtime_error(what) {}
};

/// One compensator update. Pure P/D on the force error; any integral
/// behavior comes from how the caller applies the output (see
/// simulate_contact_loop).
Eigen::Vector3d compensator_step(ForceControllerState& state,
                                 const Eigen::Vector3d& f_r,
                                 const Eigen::Vector3d& f_s);

Wrench environment_force(const ContactEnvironment& env,
                         const Eigen::Vector3d& tool_position);

/// Closed loop around an ideal position-tracked tool. The commanded
/// position is x_c = x_r + x_f where x_f accumulates the per-step
/// compensator output; holding the tool at the perturbed command is what
/// gives the loop its integral action and zero steady-state force error.
/// The sensed force fed back is the force the tool applies to the
/// environment (negative z when pressing down), the mirror of the surface
/// reaction, so a downward reference like (0,0,-10) N is trackable.
LoopTrace simulate_contact_loop(ForceControllerState& controller,
                                const ContactEnvironment& env,
                                const std::function<Eigen::Vector3d(double)>& x_r,
                                const Eigen::Vector3d& f_r, double duration,
                                const LoopConfig& config = {});

struct GuardedMoveResult {
  Eigen::Vector3d contact_position;
  LoopTrace trace;
};

/// Straight-line advance until the projected contact force reaches
/// stop_force. Throws ForceLoopError when no contact occurs within
/// max_travel.
GuardedMoveResult guarded_move(const ContactEnvironment& env,
                               const Eigen::Vector3d& start,
                               const Eigen::Vector3d& direction, double speed,
                               double stop_force, double max_travel,
                               double dt = 1e-3);

/// CSV: t, x_r(3), x_c(3), x_f(3), f_s(3), f_e(3).
void export_trace_csv(const LoopTrace& trace, std::ostream& out);

}  // namespace bimanip

#endif
