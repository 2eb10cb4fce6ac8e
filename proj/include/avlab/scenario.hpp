#ifndef AVLAB_SCENARIO_HPP
#define AVLAB_SCENARIO_HPP

#include <cstdint>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "avlab/solver.hpp"

namespace avlab {

struct Uniform {
  double rho = 0.5;
};

/// n_waves alternating low/high plateaus of equal width, starting low.
struct SquareWaveTrain {
  double rho_low = 0.15;
  double rho_high = 0.85;
  int n_waves = 3;
};

struct Riemann {
  double rho_left = 0.1;
  double rho_right = 0.6;
  double x_split = 0.5;
};

struct Profile {
  std::vector<double> values;  // one density per cell
};

using InitialCondition = std::variant<Uniform, SquareWaveTrain, Riemann, Profile>;

struct RewardWeights {
  double w1 = 0.2;  // minimum-flux term
  double w2 = 0.3;  // ego-speed term
  double w3 = 0.5;  // velocity total-variation penalty
};

struct ScenarioConfig {
  Grid grid;
  FlowParams flow;
  InitialCondition initial = Uniform{};
  double av_y0 = 0.5;
  double horizon = 2.0;    // episode length T
  double dt_ctrl = 0.02;   // control interval
  double cfl = 0.9;
  RewardWeights weights;
  int n_obs = 40;          // observation bins
  std::uint64_t seed = 0;
};

/// Throws ConfigError listing every violated field.
void validate(const ScenarioConfig& config);

/// Construct the initial world. Deterministic given the config.
std::tuple<TrafficState, AvState, Grid, FlowParams> build(const ScenarioConfig& config);

/// Parse a config from JSON text. Unknown keys are errors.
ScenarioConfig parse_config(const std::string& json_text);

/// Load and parse a config file.
ScenarioConfig load_config(const std::string& path);

/// Exact mass of the configured initial profile (for conservation oracles).
double analytic_mass(const ScenarioConfig& config);

}  // namespace avlab

#endif
