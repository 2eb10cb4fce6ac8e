#ifndef AVLAB_METRICS_HPP
#define AVLAB_METRICS_HPP

#include <functional>
#include <string>
#include <vector>

#include "avlab/ppo.hpp"
#include "avlab/scenario.hpp"
#include "avlab/solver.hpp"

namespace avlab {

/// Per-episode evaluation summary.
struct EpisodeMetrics {
  double avg_flux = 0.0;       // time-space mean of f(rho)
  double ego_speed = 0.0;      // time mean of the realized AV speed
  double avg_speed = 0.0;      // time-space mean of v(rho)
  double avg_deviation = 0.0;  // time mean of the spatial std of v(rho)
  double min_flux_over_time = 0.0;
  double episode_return = 0.0; // sum of control-interval rewards
};

/// Streaming accumulator fed after every solver step.
class MetricsAccumulator {
 public:
  void add_step(const TrafficState& state, const AvState& av, const FlowParams& p);
  void add_reward(double control_step_reward);
  EpisodeMetrics finalize() const;
  long steps() const { return steps_; }

 private:
  long steps_ = 0;
  double flux_sum_ = 0.0;
  double speed_sum_ = 0.0;
  double ego_sum_ = 0.0;
  double deviation_sum_ = 0.0;
  double min_flux_ = 1e300;
  double return_sum_ = 0.0;
};

struct AggregateMetrics {
  EpisodeMetrics mean;
  EpisodeMetrics stddev;
  int n_episodes = 0;
};

enum class EvalMode { Stochastic, Deterministic };

/// action = controller(observation, rng); rng draws only in stochastic mode.
using Controller = std::function<double(const std::vector<double>&, Rng&)>;

Controller policy_controller(const GaussianPolicy& policy, EvalMode mode);
Controller constant_controller(double action);

struct EvalRecord {
  AggregateMetrics metrics;
  std::vector<std::vector<double>> command_sequences;  // per episode v_cmd series
};

/// Run n_episodes of the scenario under the controller, accumulating
/// metrics at solver resolution. Episode e uses the RNG stream
/// mix_seed(seed, e); with a deterministic controller all episodes agree.
EvalRecord evaluate(const ScenarioConfig& config, const Controller& controller,
                    int n_episodes, std::uint64_t seed);

/// Delimited-text matrix of a trace: one row per snapshot, columns
/// t, y, y_dot, v_cmd then every cell density, 9 significant digits.
void export_time_space(const Trace& trace, const std::string& path);

struct LearningCurveSummary {
  double baseline_return = 0.0;       // first 5-iteration window mean
  double best_smoothed_return = 0.0;  // best sliding 5-window mean
  double improvement_fraction = 0.0;  // (best - first) / |first|
};

LearningCurveSummary learning_curve_summary(const std::vector<double>& curve);

/// Machine-readable key/value report (JSON object, sorted keys).
std::string metrics_to_json(const AggregateMetrics& metrics);

/// Aligned human-readable comparison table; one row per (label, metrics).
std::string metrics_table(
    const std::vector<std::pair<std::string, AggregateMetrics>>& rows);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace avlab

#endif
