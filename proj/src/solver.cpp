#include "avlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "avlab/errors.hpp"

namespace avlab {

namespace {

constexpr double kBoundTol = 1e-12;  // round-off repair window at 0 and rho_max

int av_cell(double y, const Grid& grid) {
  int j = static_cast<int>(std::floor(y / grid.dx()));
  return std::clamp(j, 0, grid.n_cells - 1);
}

/// Index of the grid interface carrying the flux cap: the first interface
/// at or downstream of y. Interface i sits at x = i*dx between cells i-1
/// and i; values 0..n_cells are meaningful (the two ends coincide on
/// periodic domains).
int av_interface(double y, const Grid& grid) {
  int i = static_cast<int>(std::ceil(y / grid.dx()));
  return std::clamp(i, 0, grid.n_cells);
}

}  // namespace

void validate(const Grid& grid, const FlowParams& p) {
  validate(p);
  if (!(grid.length > 0.0))
    throw ConfigError("grid.length must be > 0");
  if (grid.n_cells < 4)
    throw ConfigError("grid.n_cells must be >= 4");
  if (grid.boundary.kind == Boundary::Kind::Dirichlet) {
    for (double rho : {grid.boundary.rho_in, grid.boundary.rho_out}) {
      if (!(rho >= 0.0 && rho <= p.rho_max))
        throw ConfigError("grid.boundary ghost densities must lie in [0, rho_max]");
    }
  }
}

double cfl_timestep(const Grid& grid, const FlowParams& p, double cfl) {
  if (!(cfl > 0.0 && cfl <= 1.0))
    throw std::domain_error("cfl must lie in (0, 1]");
  return cfl * grid.dx() / p.v_max;
}

double godunov_flux(double rho_left, double rho_right, const FlowParams& p) {
  return std::min(demand(rho_left, p), supply(rho_right, p));
}

double av_realized_speed(const AvState& av, const TrafficState& state,
                         const Grid& grid, const FlowParams& p) {
  const int n = grid.n_cells;
  if (grid.boundary.kind == Boundary::Kind::Periodic) {
    const int down = (av_cell(av.y, grid) + 1) % n;
    return std::min(av.v_cmd, velocity(state.rho[down], p));
  }
  if (av.y >= grid.length) return av.v_cmd;  // off the road
  const int down = av_cell(av.y, grid) + 1;
  const double rho_down =
      down >= n ? grid.boundary.rho_out : state.rho[down];
  return std::min(av.v_cmd, velocity(rho_down, p));
}

double constrained_interface_flux(double rho_left, double rho_right,
                                  double y_dot, const FlowParams& p) {
  const double cap = f_alpha(y_dot, p) + y_dot * rho_left;
  return std::min(godunov_flux(rho_left, rho_right, p), cap);
}

void advance(TrafficState& state, AvState& av, const Grid& grid,
             const FlowParams& p, double dt, StepDiagnostics* diag) {
  const int n = grid.n_cells;
  const double dx = grid.dx();
  if (!(dt > 0.0))
    throw std::domain_error("advance: dt must be > 0");
  if (dt > cfl_timestep(grid, p, 1.0) * (1.0 + 1e-9))
    throw IntegrityError("advance: dt " + std::to_string(dt) +
                         " violates the CFL bound dx/v_max");

  const bool periodic = grid.boundary.kind == Boundary::Kind::Periodic;
  av.y_dot = av_realized_speed(av, state, grid, p);

  // Interface fluxes F[0..n]; F[i] sits between cells i-1 and i.
  static thread_local std::vector<double> fluxes;
  fluxes.assign(n + 1, 0.0);
  for (int i = 1; i < n; ++i)
    fluxes[i] = godunov_flux(state.rho[i - 1], state.rho[i], p);
  if (periodic) {
    fluxes[0] = godunov_flux(state.rho[n - 1], state.rho[0], p);
    fluxes[n] = fluxes[0];
  } else {
    fluxes[0] = godunov_flux(grid.boundary.rho_in, state.rho[0], p);
    fluxes[n] = godunov_flux(state.rho[n - 1], grid.boundary.rho_out, p);
  }

  // Flux cap at the single interface immediately downstream of y.
  const bool on_road = periodic || av.y < grid.length;
  if (on_road) {
    int i = av_interface(av.y, grid);
    if (periodic) i %= n;
    const double rho_l =
        i > 0 ? state.rho[i - 1]
              : (periodic ? state.rho[n - 1] : grid.boundary.rho_in);
    const double rho_r =
        i < n ? state.rho[i] : grid.boundary.rho_out;
    const double capped = constrained_interface_flux(rho_l, rho_r, av.y_dot, p);
    if (diag) {
      diag->max_constraint_excess =
          std::max(diag->max_constraint_excess,
                   capped - av.y_dot * rho_l - f_alpha(av.y_dot, p));
      if (capped < fluxes[i]) diag->constraint_ever_active = true;
    }
    fluxes[i] = capped;
    if (periodic && i == 0) fluxes[n] = capped;
  }

  const double lambda = dt / dx;
  for (int j = 0; j < n; ++j) {
    double r = state.rho[j] - lambda * (fluxes[j + 1] - fluxes[j]);
    if (!std::isfinite(r))
      throw IntegrityError("advance: non-finite density in cell " +
                           std::to_string(j));
    if (r < 0.0 || r > p.rho_max) {
      if (r >= -kBoundTol && r <= p.rho_max + kBoundTol) {
        r = std::clamp(r, 0.0, p.rho_max);  // round-off repair only
      } else {
        throw IntegrityError("advance: density " + std::to_string(r) +
                             " outside [0, rho_max] in cell " +
                             std::to_string(j));
      }
    }
    state.rho[j] = r;
  }

  av.y += av.y_dot * dt;
  if (periodic) {
    av.y = std::fmod(av.y, grid.length);
    if (av.y < 0.0) av.y += grid.length;
  }
  state.time += dt;
}

std::pair<TrafficState, AvState> step(const TrafficState& state,
                                      const AvState& av, const Grid& grid,
                                      const FlowParams& p, double dt) {
  TrafficState s = state;
  AvState a = av;
  advance(s, a, grid, p, dt);
  return {std::move(s), std::move(a)};
}

Trace run(TrafficState state, AvState av, const Grid& grid,
          const FlowParams& p, double t_end, const SpeedSchedule& schedule,
          const RunOptions& options) {
  if (!(t_end >= state.time))
    throw std::domain_error("run: t_end precedes the state time");
  const double dt_max =
      options.fixed_dt > 0.0 ? options.fixed_dt : cfl_timestep(grid, p, options.cfl);
  const int stride = std::max(1, options.snapshot_stride);

  Trace trace;
  trace.states.push_back(state);
  trace.avs.push_back(av);

  long step_count = 0;
  while (state.time < t_end - 1e-14) {
    const double dt = std::min(dt_max, t_end - state.time);
    av.v_cmd = std::clamp(schedule(state.time), 0.0, p.v_max);
    advance(state, av, grid, p, dt, options.diagnostics);
    if (options.observer) options.observer(state, av);
    if (++step_count % stride == 0) {
      trace.states.push_back(state);
      trace.avs.push_back(av);
    }
  }
  if (step_count % stride != 0) {  // always include the final state
    trace.states.push_back(state);
    trace.avs.push_back(av);
  }
  return trace;
}

}  // namespace avlab
