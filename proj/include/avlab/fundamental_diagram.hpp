#ifndef AVLAB_FUNDAMENTAL_DIAGRAM_HPP
#define AVLAB_FUNDAMENTAL_DIAGRAM_HPP

namespace avlab {

/// Greenshields fundamental-diagram constants plus the capacity-drop
/// factor alpha of the moving bottleneck.
struct FlowParams {
  double v_max = 1.0;    // free-flow speed, > 0
  double rho_max = 1.0;  // jam density, > 0
  double alpha = 0.6;    // bottleneck capacity fraction, strictly in (0, 1)
};

/// Throws ConfigError if any invariant is violated.
void validate(const FlowParams& p);

/// v(rho) = v_max (1 - rho/rho_max). Affine, decreasing.
double velocity(double rho, const FlowParams& p);

/// f(rho) = rho * v(rho). Concave parabola with vertex at rho_max/2.
double flux(double rho, const FlowParams& p);

/// Density of maximum flux, rho_max/2.
double critical_density(const FlowParams& p);

/// Maximum flux the road can pass through the moving bottleneck, measured
/// in the bottleneck frame: alpha * max_rho(f(rho) - v_av rho)
///   = alpha * rho_max * (v_max - v_av)^2 / (4 v_max).
double f_alpha(double v_av, const FlowParams& p);

/// Lower intersection of the constraint line f_alpha(V) + V rho with the
/// fundamental diagram: rho_max (1 - V/v_max)(1 - sqrt(1-alpha))/2.
/// rho_check(V) <= rho_hat(V); both collapse to 0 at V = v_max.
double rho_check(double v_av, const FlowParams& p);

/// Upper intersection: rho_max (1 - V/v_max)(1 + sqrt(1-alpha))/2.
double rho_hat(double v_av, const FlowParams& p);

/// Godunov demand: f(min(rho, rho_c)).
double demand(double rho, const FlowParams& p);

/// Godunov supply: f(max(rho, rho_c)).
double supply(double rho, const FlowParams& p);

}  // namespace avlab

#endif
