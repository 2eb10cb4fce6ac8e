#ifndef AVLAB_PPO_HPP
#define AVLAB_PPO_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "avlab/mlp.hpp"
#include "avlab/rng.hpp"
#include "avlab/traffic_env.hpp"

namespace avlab {

/// Stochastic scalar-action policy: an MLP producing the Gaussian mean
/// plus a state-independent log standard deviation.
class GaussianPolicy {
 public:
  GaussianPolicy(int obs_dim, const std::vector<int>& hidden, Rng& rng);

  /// (mean, std) of the action distribution at obs.
  std::pair<double, double> forward(const std::vector<double>& obs) const;

  /// Draw an action and its log-density; the raw sample is returned
  /// unclamped (the environment clamps on application).
  std::pair<double, double> sample(const std::vector<double>& obs, Rng& rng) const;

  /// Evaluation-mode action: the distribution mean.
  double deterministic(const std::vector<double>& obs) const;

  double log_prob(const std::vector<double>& obs, double action) const;

  double log_std() const { return log_std_; }
  void set_log_std(double v);
  double entropy() const;  // differential entropy of the Gaussian

  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

  static constexpr double kLogStdMin = -5.0;
  static constexpr double kLogStdMax = 1.0;
  static constexpr double kLogStdInit = -0.6931471805599453;  // log(0.5)

 private:
  Mlp net_;
  double log_std_ = kLogStdInit;
};

double gaussian_log_prob(double action, double mean, double std_dev);

/// Value function V_phi with the same trunk architecture.
class ValueFunction {
 public:
  ValueFunction(int obs_dim, const std::vector<int>& hidden, Rng& rng);
  double value(const std::vector<double>& obs) const;
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

 private:
  Mlp net_;
};

/// One collected episode.
struct Trajectory {
  std::vector<std::vector<double>> observations;
  std::vector<double> actions;    // raw (unclamped) samples
  std::vector<double> log_probs;  // under the collecting policy
  std::vector<double> rewards;
  std::vector<double> values;
  double bootstrap_value = 0.0;   // value of the state after the last step
  double episode_return() const;
};

struct Hyperparams {
  double gamma = 0.99;
  double lambda = 0.95;
  double clip_eps = 0.2;
  double lr_actor = 3e-4;
  double lr_critic = 1e-3;
  int epochs = 10;
  int minibatch = 64;
  int horizon_episodes = 4;
  int iterations = 300;
  double entropy_coef = 1e-3;
  int n_workers = 1;
  bool critic_on_episode_return = false;  // fidelity mode: regress on R(tau)
};

void validate(const Hyperparams& hp);

/// GAE advantages and value targets for one episode (pre-normalization).
std::pair<std::vector<double>, std::vector<double>> compute_gae(
    const Trajectory& traj, double gamma, double lambda);

/// In-place normalization to zero mean / unit variance.
void normalize_advantages(std::vector<double>& advantages);

/// Flattened training batch.
struct Batch {
  std::vector<std::vector<double>> observations;
  std::vector<double> actions;
  std::vector<double> log_probs;
  std::vector<double> advantages;  // normalized
  std::vector<double> returns;     // critic targets
};

Batch assemble_batch(const std::vector<Trajectory>& trajectories,
                     const Hyperparams& hp);

struct UpdateStats {
  double actor_loss = 0.0;   // last epoch mean of -(surrogate + entropy bonus)
  double critic_loss = 0.0;  // last epoch mean squared error
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double entropy = 0.0;
};

/// PPO optimizer state: the two Adam instances persist across iterations.
class PpoUpdater {
 public:
  PpoUpdater(GaussianPolicy& policy, ValueFunction& value, const Hyperparams& hp);

  UpdateStats update(const Batch& batch, Rng& rng);

  Adam& actor_adam() { return actor_adam_; }
  Adam& critic_adam() { return critic_adam_; }

 private:
  GaussianPolicy& policy_;
  ValueFunction& value_;
  Hyperparams hp_;
  Adam actor_adam_;   // over [net params..., log_std]
  Adam critic_adam_;
};

/// Derivative of the per-sample clipped-surrogate objective (plus entropy
/// bonus) with respect to (mean, log_std); exposed for the analytic
/// gradient oracle in tests.
struct SurrogateGrad {
  double d_mean = 0.0;
  double d_log_std = 0.0;
  double ratio = 1.0;
  bool clipped = false;
  double objective = 0.0;
};
SurrogateGrad clipped_surrogate_grad(double action, double mean, double std_dev,
                                     double log_prob_old, double advantage,
                                     double clip_eps);

struct TrainResult {
  std::vector<double> learning_curve;  // per-iteration mean episode return
  std::vector<UpdateStats> stats;
};

struct TrainCallbacks {
  // invoked after each iteration with (iteration, mean return, stats)
  std::function<void(int, double, const UpdateStats&)> on_iteration;
};

/// Full training loop: rollout collection across horizon_episodes env
/// instances (parallel when hp.n_workers > 1; results are identical either
/// way because every episode owns an RNG stream derived from the seed).
TrainResult train(const EnvFactory& make_env, GaussianPolicy& policy,
                  ValueFunction& value, const Hyperparams& hp,
                  std::uint64_t seed, const TrainCallbacks& callbacks = {});

/// Collect one episode with stochastic actions.
Trajectory collect_episode(Env& env, const GaussianPolicy& policy,
                           const ValueFunction& value, std::uint64_t episode_seed);

}  // namespace avlab

#endif
