#ifndef AVLAB_SOLVER_HPP
#define AVLAB_SOLVER_HPP

#include <functional>
#include <utility>
#include <vector>

#include "avlab/fundamental_diagram.hpp"

namespace avlab {

struct Boundary {
  enum class Kind { Periodic, Dirichlet };
  Kind kind = Kind::Periodic;
  double rho_in = 0.0;   // left ghost state (Dirichlet only)
  double rho_out = 0.0;  // right ghost state (Dirichlet only)

  static Boundary periodic() { return Boundary{}; }
  static Boundary dirichlet(double rho_in, double rho_out) {
    return Boundary{Kind::Dirichlet, rho_in, rho_out};
  }
};

struct Grid {
  double length = 1.0;
  int n_cells = 400;
  Boundary boundary;

  double dx() const { return length / n_cells; }
};

void validate(const Grid& grid, const FlowParams& p);

/// Cell-averaged density profile at one time instant.
struct TrafficState {
  std::vector<double> rho;
  double time = 0.0;
};

/// The controlled vehicle: position, commanded maximum speed and the
/// realized speed applied over the most recent step.
struct AvState {
  double y = 0.0;
  double v_cmd = 0.0;
  double y_dot = 0.0;
};

/// Stable explicit step size: cfl * dx / v_max.
double cfl_timestep(const Grid& grid, const FlowParams& p, double cfl);

/// Exact Riemann flux of the Greenshields diagram: min(demand(l), supply(r)).
double godunov_flux(double rho_left, double rho_right, const FlowParams& p);

/// min(v_cmd, v(rho_down)) where rho_down is the cell immediately
/// downstream of the AV's cell. Outside a Dirichlet domain the AV is off
/// the road and the commanded speed applies unconditionally.
double av_realized_speed(const AvState& av, const TrafficState& state,
                         const Grid& grid, const FlowParams& p);

/// Godunov flux capped so that the discrete bottleneck inequality
/// F - y_dot * rho_left <= f_alpha(y_dot) holds at the AV interface.
double constrained_interface_flux(double rho_left, double rho_right,
                                  double y_dot, const FlowParams& p);

/// Per-step diagnostics accumulated by the stepping routines.
struct StepDiagnostics {
  // max over steps of (F_av - y_dot*rho_up - f_alpha(y_dot)); <= 0 when the
  // discrete flux constraint holds everywhere.
  double max_constraint_excess = -1e300;
  // true on any step where the cap reduced the interface flux
  bool constraint_ever_active = false;
};

/// One conservative finite-volume update of the coupled system, in place.
/// The realized AV speed is frozen at its start-of-step value; the flux cap
/// is applied at the single interface immediately downstream of y.
void advance(TrafficState& state, AvState& av, const Grid& grid,
             const FlowParams& p, double dt, StepDiagnostics* diag = nullptr);

/// Value-semantics wrapper around advance().
std::pair<TrafficState, AvState> step(const TrafficState& state,
                                      const AvState& av, const Grid& grid,
                                      const FlowParams& p, double dt);

using SpeedSchedule = std::function<double(double)>;  // time -> commanded speed
using StepObserver = std::function<void(const TrafficState&, const AvState&)>;

/// Snapshot trace of an open-loop run.
struct Trace {
  std::vector<TrafficState> states;
  std::vector<AvState> avs;
};

struct RunOptions {
  double cfl = 0.9;
  double fixed_dt = 0.0;                  // > 0: use this step instead of the CFL step
  int snapshot_stride = 1;                // snapshots every k-th step
  StepObserver observer;                  // invoked after every solver step
  StepDiagnostics* diagnostics = nullptr;
};

/// Drive the solver from state.time to t_end under a piecewise commanded
/// speed schedule sampled at each step start. The initial state is always
/// the first snapshot.
Trace run(TrafficState state, AvState av, const Grid& grid,
          const FlowParams& p, double t_end, const SpeedSchedule& schedule,
          const RunOptions& options = {});

}  // namespace avlab

#endif
