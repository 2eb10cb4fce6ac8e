#include "avlab/fundamental_diagram.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "avlab/errors.hpp"

namespace avlab {

namespace {

void check_density(double rho, const FlowParams& p, const char* where) {
  if (!(rho >= 0.0 && rho <= p.rho_max)) {
    throw std::domain_error(std::string(where) + ": density " +
                            std::to_string(rho) + " outside [0, " +
                            std::to_string(p.rho_max) + "]");
  }
}

void check_speed(double v, const FlowParams& p, const char* where) {
  if (!(v >= 0.0 && v <= p.v_max)) {
    throw std::domain_error(std::string(where) + ": speed " +
                            std::to_string(v) + " outside [0, " +
                            std::to_string(p.v_max) + "]");
  }
}

}  // namespace

void validate(const FlowParams& p) {
  if (!(p.v_max > 0.0))
    throw ConfigError("flow.v_max must be > 0");
  if (!(p.rho_max > 0.0))
    throw ConfigError("flow.rho_max must be > 0");
  if (!(p.alpha > 0.0 && p.alpha < 1.0))
    throw ConfigError("flow.alpha must lie strictly in (0, 1)");
}

double velocity(double rho, const FlowParams& p) {
  check_density(rho, p, "velocity");
  return p.v_max * (1.0 - rho / p.rho_max);
}

double flux(double rho, const FlowParams& p) {
  return rho * velocity(rho, p);
}

double critical_density(const FlowParams& p) { return 0.5 * p.rho_max; }

double f_alpha(double v_av, const FlowParams& p) {
  check_speed(v_av, p, "f_alpha");
  const double gap = p.v_max - v_av;
  return p.alpha * p.rho_max * gap * gap / (4.0 * p.v_max);
}

double rho_check(double v_av, const FlowParams& p) {
  check_speed(v_av, p, "rho_check");
  return 0.5 * p.rho_max * (1.0 - v_av / p.v_max) * (1.0 - std::sqrt(1.0 - p.alpha));
}

double rho_hat(double v_av, const FlowParams& p) {
  check_speed(v_av, p, "rho_hat");
  return 0.5 * p.rho_max * (1.0 - v_av / p.v_max) * (1.0 + std::sqrt(1.0 - p.alpha));
}

double demand(double rho, const FlowParams& p) {
  check_density(rho, p, "demand");
  const double rc = critical_density(p);
  return flux(rho < rc ? rho : rc, p);
}

double supply(double rho, const FlowParams& p) {
  check_density(rho, p, "supply");
  const double rc = critical_density(p);
  return flux(rho > rc ? rho : rc, p);
}

}  // namespace avlab
