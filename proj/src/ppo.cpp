#include "avlab/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "avlab/errors.hpp"

namespace avlab {

namespace {
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5*log(2*pi)
}

GaussianPolicy::GaussianPolicy(int obs_dim, const std::vector<int>& hidden, Rng& rng)
    : net_([&] {
        std::vector<int> sizes{obs_dim};
        sizes.insert(sizes.end(), hidden.begin(), hidden.end());
        sizes.push_back(1);
        return Mlp(sizes, rng);
      }()) {}

std::pair<double, double> GaussianPolicy::forward(const std::vector<double>& obs) const {
  auto ws = net_.make_workspace();
  const double mean = net_.forward(obs, ws);
  return {mean, std::exp(log_std_)};
}

double gaussian_log_prob(double action, double mean, double std_dev) {
  const double z = (action - mean) / std_dev;
  return -0.5 * z * z - std::log(std_dev) - kHalfLog2Pi;
}

std::pair<double, double> GaussianPolicy::sample(const std::vector<double>& obs,
                                                 Rng& rng) const {
  const auto [mean, std_dev] = forward(obs);
  const double action = mean + std_dev * rng.normal();
  return {action, gaussian_log_prob(action, mean, std_dev)};
}

double GaussianPolicy::deterministic(const std::vector<double>& obs) const {
  return forward(obs).first;
}

double GaussianPolicy::log_prob(const std::vector<double>& obs, double action) const {
  const auto [mean, std_dev] = forward(obs);
  return gaussian_log_prob(action, mean, std_dev);
}

void GaussianPolicy::set_log_std(double v) {
  log_std_ = std::clamp(v, kLogStdMin, kLogStdMax);
}

double GaussianPolicy::entropy() const {
  return log_std_ + 0.5 + kHalfLog2Pi;
}

ValueFunction::ValueFunction(int obs_dim, const std::vector<int>& hidden, Rng& rng)
    : net_([&] {
        std::vector<int> sizes{obs_dim};
        sizes.insert(sizes.end(), hidden.begin(), hidden.end());
        sizes.push_back(1);
        return Mlp(sizes, rng);
      }()) {}

double ValueFunction::value(const std::vector<double>& obs) const {
  auto ws = net_.make_workspace();
  return net_.forward(obs, ws);
}

double Trajectory::episode_return() const {
  return std::accumulate(rewards.begin(), rewards.end(), 0.0);
}

void validate(const Hyperparams& hp) {
  if (!(hp.gamma > 0.0 && hp.gamma <= 1.0))
    throw ConfigError("hyper.gamma must lie in (0, 1]");
  if (!(hp.lambda > 0.0 && hp.lambda <= 1.0))
    throw ConfigError("hyper.lambda must lie in (0, 1]");
  if (!(hp.clip_eps > 0.0 && hp.clip_eps <= 0.5))
    throw ConfigError("hyper.clip_eps must lie in (0, 0.5]");
  if (!(hp.lr_actor > 0.0 && hp.lr_critic > 0.0))
    throw ConfigError("hyper learning rates must be > 0");
  if (hp.epochs < 1 || hp.minibatch < 1 || hp.horizon_episodes < 1 ||
      hp.iterations < 0 || hp.n_workers < 1)
    throw ConfigError("hyper counts must be positive (iterations may be 0)");
  if (hp.entropy_coef < 0.0)
    throw ConfigError("hyper.entropy_coef must be >= 0");
}

std::pair<std::vector<double>, std::vector<double>> compute_gae(
    const Trajectory& traj, double gamma, double lambda) {
  const std::size_t n = traj.rewards.size();
  if (n == 0) throw std::invalid_argument("compute_gae: empty trajectory");
  if (traj.values.size() != n)
    throw std::invalid_argument("compute_gae: values/rewards length mismatch");

  std::vector<double> advantages(n), returns(n);
  double gae = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double v_next = (i + 1 < n) ? traj.values[i + 1] : traj.bootstrap_value;
    const double delta = traj.rewards[i] + gamma * v_next - traj.values[i];
    gae = delta + gamma * lambda * gae;
    advantages[i] = gae;
    returns[i] = gae + traj.values[i];
  }
  return {std::move(advantages), std::move(returns)};
}

void normalize_advantages(std::vector<double>& advantages) {
  const double n = static_cast<double>(advantages.size());
  if (advantages.empty()) return;
  double mean = 0.0;
  for (double a : advantages) mean += a;
  mean /= n;
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  var /= n;
  const double scale = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& a : advantages) a = (a - mean) * scale;
}

Batch assemble_batch(const std::vector<Trajectory>& trajectories,
                     const Hyperparams& hp) {
  Batch batch;
  for (const auto& traj : trajectories) {
    auto [adv, ret] = compute_gae(traj, hp.gamma, hp.lambda);
    if (hp.critic_on_episode_return) {
      std::fill(ret.begin(), ret.end(), traj.episode_return());
    }
    for (std::size_t i = 0; i < traj.rewards.size(); ++i) {
      batch.observations.push_back(traj.observations[i]);
      batch.actions.push_back(traj.actions[i]);
      batch.log_probs.push_back(traj.log_probs[i]);
      batch.advantages.push_back(adv[i]);
      batch.returns.push_back(ret[i]);
    }
  }
  normalize_advantages(batch.advantages);
  return batch;
}

SurrogateGrad clipped_surrogate_grad(double action, double mean, double std_dev,
                                     double log_prob_old, double advantage,
                                     double clip_eps) {
  SurrogateGrad out;
  const double log_prob_new = gaussian_log_prob(action, mean, std_dev);
  out.ratio = std::exp(log_prob_new - log_prob_old);
  const double surr1 = out.ratio * advantage;
  const double clipped_ratio = std::clamp(out.ratio, 1.0 - clip_eps, 1.0 + clip_eps);
  const double surr2 = clipped_ratio * advantage;
  out.objective = std::min(surr1, surr2);
  out.clipped = std::abs(out.ratio - 1.0) > clip_eps;

  // d(min(surr1, surr2))/d(log pi_new): zero only when the clipped branch is
  // selected while the clip is saturated.
  const bool pass_through = surr1 <= surr2 || !out.clipped;
  if (pass_through) {
    const double g = advantage * out.ratio;  // d objective / d log_prob_new
    const double z = (action - mean) / std_dev;
    out.d_mean = g * z / std_dev;
    out.d_log_std = g * (z * z - 1.0);
  }
  return out;
}

PpoUpdater::PpoUpdater(GaussianPolicy& policy, ValueFunction& value,
                       const Hyperparams& hp)
    : policy_(policy),
      value_(value),
      hp_(hp),
      actor_adam_(policy.net().n_params() + 1, hp.lr_actor),
      critic_adam_(value.net().n_params(), hp.lr_critic) {}

UpdateStats PpoUpdater::update(const Batch& batch, Rng& rng) {
  const std::size_t n = batch.actions.size();
  if (n == 0) throw std::invalid_argument("PpoUpdater::update: empty batch");

  auto policy_ws = policy_.net().make_workspace();
  auto value_ws = value_.net().make_workspace();
  const std::size_t n_actor = policy_.net().n_params() + 1;  // + log_std slot
  std::vector<double> actor_grad(n_actor);
  std::vector<double> actor_params(n_actor);
  std::vector<double> critic_grad(value_.net().n_params());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  UpdateStats stats;
  for (int epoch = 0; epoch < hp_.epochs; ++epoch) {
    // Fisher-Yates from the update stream keeps runs reproducible.
    for (std::size_t i = n; i > 1; --i)
      std::swap(order[i - 1], order[rng.index(i)]);

    double ep_actor_loss = 0.0, ep_critic_loss = 0.0;
    double ep_ratio = 0.0, ep_clip = 0.0;
    for (std::size_t start = 0; start < n; start += hp_.minibatch) {
      const std::size_t stop = std::min(n, start + hp_.minibatch);
      const double inv_b = 1.0 / static_cast<double>(stop - start);
      std::fill(actor_grad.begin(), actor_grad.end(), 0.0);
      std::fill(critic_grad.begin(), critic_grad.end(), 0.0);

      const double std_dev = std::exp(policy_.log_std());
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t i = order[k];
        const auto& obs = batch.observations[i];

        const double mean = policy_.net().forward(obs, policy_ws);
        const auto g = clipped_surrogate_grad(batch.actions[i], mean, std_dev,
                                              batch.log_probs[i],
                                              batch.advantages[i], hp_.clip_eps);
        // Maximize objective + entropy bonus: descend on the negative.
        policy_.net().backward(-g.d_mean * inv_b, policy_ws, actor_grad);
        actor_grad.back() -= (g.d_log_std + hp_.entropy_coef) * inv_b;

        const double v = value_.net().forward(obs, value_ws);
        const double err = v - batch.returns[i];
        value_.net().backward(2.0 * err * inv_b, value_ws, critic_grad);

        ep_actor_loss -= (g.objective + hp_.entropy_coef * policy_.entropy());
        ep_critic_loss += err * err;
        ep_ratio += g.ratio;
        ep_clip += g.clipped ? 1.0 : 0.0;
      }

      std::copy(policy_.net().params().begin(), policy_.net().params().end(),
                actor_params.begin());
      actor_params.back() = policy_.log_std();
      actor_adam_.step(actor_params, actor_grad);
      std::copy(actor_params.begin(), actor_params.end() - 1,
                policy_.net().params().begin());
      policy_.set_log_std(actor_params.back());

      critic_adam_.step(value_.net().params(), critic_grad);
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    stats.actor_loss = ep_actor_loss * inv_n;
    stats.critic_loss = ep_critic_loss * inv_n;
    stats.mean_ratio = ep_ratio * inv_n;
    stats.clip_fraction = ep_clip * inv_n;
  }
  stats.entropy = policy_.entropy();
  return stats;
}

Trajectory collect_episode(Env& env, const GaussianPolicy& policy,
                           const ValueFunction& value, std::uint64_t episode_seed) {
  Rng rng(episode_seed);
  Trajectory traj;
  std::vector<double> obs = env.reset(episode_seed);
  bool done = false;
  while (!done) {
    auto [action, log_prob] = policy.sample(obs, rng);
    traj.observations.push_back(obs);
    traj.actions.push_back(action);
    traj.log_probs.push_back(log_prob);
    traj.values.push_back(value.value(obs));
    EnvStep step = env.step(action);
    traj.rewards.push_back(step.reward);
    obs = std::move(step.observation);
    done = step.done;
  }
  traj.bootstrap_value = 0.0;  // finite-horizon episode: true termination
  return traj;
}

TrainResult train(const EnvFactory& make_env, GaussianPolicy& policy,
                  ValueFunction& value, const Hyperparams& hp,
                  std::uint64_t seed, const TrainCallbacks& callbacks) {
  validate(hp);
  TrainResult result;
  PpoUpdater updater(policy, value, hp);
  Rng update_rng(mix_seed(seed, 0x5eedu));

  const int episodes = hp.horizon_episodes;
  std::vector<std::unique_ptr<Env>> envs;
  const int workers = std::min(hp.n_workers, episodes);
  for (int w = 0; w < std::max(1, workers); ++w) envs.push_back(make_env());

  for (int iter = 0; iter < hp.iterations; ++iter) {
    std::vector<Trajectory> trajectories(episodes);
    if (workers <= 1) {
      for (int ep = 0; ep < episodes; ++ep)
        trajectories[ep] =
            collect_episode(*envs[0], policy, value, mix_seed(seed, iter, ep));
    } else {
      // Episode e goes to worker e % workers; each episode's seed stream is
      // independent of the schedule, so results match the sequential mode.
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          for (int ep = w; ep < episodes; ep += workers)
            trajectories[ep] =
                collect_episode(*envs[w], policy, value, mix_seed(seed, iter, ep));
        });
      }
      for (auto& t : pool) t.join();
    }

    double mean_return = 0.0;
    for (const auto& traj : trajectories) mean_return += traj.episode_return();
    mean_return /= episodes;

    Batch batch = assemble_batch(trajectories, hp);
    UpdateStats stats = updater.update(batch, update_rng);
    result.learning_curve.push_back(mean_return);
    result.stats.push_back(stats);
    if (callbacks.on_iteration) callbacks.on_iteration(iter, mean_return, stats);
  }
  return result;
}

}  // namespace avlab
