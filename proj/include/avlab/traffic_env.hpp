#ifndef AVLAB_TRAFFIC_ENV_HPP
#define AVLAB_TRAFFIC_ENV_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "avlab/scenario.hpp"
#include "avlab/solver.hpp"

namespace avlab {

/// Minimum of the flux over all cells: Phi(t).
double min_flux(const TrafficState& state, const FlowParams& p);

/// Sum of absolute successive differences, no wrap-around term.
double total_variation(const std::vector<double>& values);

/// Composite reward r = w1*Phi + w2*y_dot - w3*TV(v(t,.)).
double reward(const TrafficState& state, const AvState& av,
              const RewardWeights& weights, const FlowParams& p);

struct EnvStep {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
  std::map<std::string, double> info;
};

/// Abstract episodic environment with a scalar action in [0, 1].
class Env {
 public:
  virtual ~Env() = default;
  virtual int obs_dim() const = 0;
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  virtual EnvStep step(double action) = 0;
};

using EnvFactory = std::function<std::unique_ptr<Env>()>;

/// The traffic episode: action -> commanded speed held over dt_ctrl,
/// reward averaged over the interval's solver steps, observation =
/// pooled density bins plus normalized AV pose.
class TrafficEnv : public Env {
 public:
  explicit TrafficEnv(const ScenarioConfig& config);

  int obs_dim() const override { return config_.n_obs + 2; }
  std::vector<double> reset(std::uint64_t seed) override;
  EnvStep step(double action) override;

  /// Number of control steps per episode, ceil(T / dt_ctrl).
  int episode_steps() const { return episode_steps_; }
  /// Solver substeps per control step.
  int substeps() const { return substeps_; }
  double solver_dt() const { return solver_dt_; }

  const TrafficState& state() const { return state_; }
  const AvState& av() const { return av_; }
  const Grid& grid() const { return grid_; }
  const FlowParams& flow() const { return flow_; }
  const ScenarioConfig& config() const { return config_; }

  /// Invoked after every solver substep; used by evaluation to accumulate
  /// metrics at solver resolution.
  void set_observer(StepObserver observer) { observer_ = std::move(observer); }

  StepDiagnostics& diagnostics() { return diagnostics_; }

 private:
  std::vector<double> observe() const;

  ScenarioConfig config_;
  Grid grid_;
  FlowParams flow_;
  TrafficState state_;
  AvState av_;
  StepObserver observer_;
  StepDiagnostics diagnostics_;
  int episode_steps_ = 0;
  int substeps_ = 0;
  double solver_dt_ = 0.0;
  int steps_taken_ = 0;
  bool done_ = true;
};

}  // namespace avlab

#endif
