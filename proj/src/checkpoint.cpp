#include "avlab/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "avlab/errors.hpp"

namespace avlab {

namespace {
using nlohmann::json;

json hyper_to_json(const Hyperparams& hp) {
  return json{{"gamma", hp.gamma},
              {"lambda", hp.lambda},
              {"clip_eps", hp.clip_eps},
              {"lr_actor", hp.lr_actor},
              {"lr_critic", hp.lr_critic},
              {"epochs", hp.epochs},
              {"minibatch", hp.minibatch},
              {"horizon_episodes", hp.horizon_episodes},
              {"iterations", hp.iterations},
              {"entropy_coef", hp.entropy_coef},
              {"n_workers", hp.n_workers},
              {"critic_on_episode_return", hp.critic_on_episode_return}};
}

Hyperparams hyper_from_json(const json& j) {
  Hyperparams hp;
  hp.gamma = j.at("gamma").get<double>();
  hp.lambda = j.at("lambda").get<double>();
  hp.clip_eps = j.at("clip_eps").get<double>();
  hp.lr_actor = j.at("lr_actor").get<double>();
  hp.lr_critic = j.at("lr_critic").get<double>();
  hp.epochs = j.at("epochs").get<int>();
  hp.minibatch = j.at("minibatch").get<int>();
  hp.horizon_episodes = j.at("horizon_episodes").get<int>();
  hp.iterations = j.at("iterations").get<int>();
  hp.entropy_coef = j.at("entropy_coef").get<double>();
  hp.n_workers = j.at("n_workers").get<int>();
  hp.critic_on_episode_return = j.at("critic_on_episode_return").get<bool>();
  return hp;
}

}  // namespace

Checkpoint make_checkpoint(const GaussianPolicy& policy, const ValueFunction& value,
                           const Hyperparams& hp, std::uint64_t seed,
                           int iterations_done, const std::string& rng_state) {
  Checkpoint ckpt;
  const auto& sizes = policy.net().sizes();
  ckpt.obs_dim = sizes.front();
  ckpt.hidden.assign(sizes.begin() + 1, sizes.end() - 1);
  ckpt.hyper = hp;
  ckpt.policy_params = policy.net().params();
  ckpt.log_std = policy.log_std();
  ckpt.value_params = value.net().params();
  ckpt.rng_state = rng_state;
  ckpt.seed = seed;
  ckpt.iterations_done = iterations_done;
  return ckpt;
}

std::pair<std::unique_ptr<GaussianPolicy>, std::unique_ptr<ValueFunction>>
restore_networks(const Checkpoint& ckpt) {
  Rng rng(0);  // init values are overwritten below
  auto policy = std::make_unique<GaussianPolicy>(ckpt.obs_dim, ckpt.hidden, rng);
  auto value = std::make_unique<ValueFunction>(ckpt.obs_dim, ckpt.hidden, rng);
  if (policy->net().params().size() != ckpt.policy_params.size() ||
      value->net().params().size() != ckpt.value_params.size())
    throw IoError("checkpoint parameter count does not match its architecture");
  policy->net().params() = ckpt.policy_params;
  policy->set_log_std(ckpt.log_std);
  value->net().params() = ckpt.value_params;
  return {std::move(policy), std::move(value)};
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  json j{{"version", ckpt.version},
         {"obs_dim", ckpt.obs_dim},
         {"hidden", ckpt.hidden},
         {"hyper", hyper_to_json(ckpt.hyper)},
         {"policy_params", ckpt.policy_params},
         {"log_std", ckpt.log_std},
         {"value_params", ckpt.value_params},
         {"rng_state", ckpt.rng_state},
         {"seed", ckpt.seed},
         {"iterations_done", ckpt.iterations_done}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out << j.dump(1) << "\n";
  if (!out) throw IoError("failed while writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw IoError("corrupt checkpoint " + path + ": " + e.what());
  }
  Checkpoint ckpt;
  try {
    ckpt.version = j.at("version").get<int>();
    if (ckpt.version != 1)
      throw IoError("unsupported checkpoint version in " + path);
    ckpt.obs_dim = j.at("obs_dim").get<int>();
    ckpt.hidden = j.at("hidden").get<std::vector<int>>();
    ckpt.hyper = hyper_from_json(j.at("hyper"));
    ckpt.policy_params = j.at("policy_params").get<std::vector<double>>();
    ckpt.log_std = j.at("log_std").get<double>();
    ckpt.value_params = j.at("value_params").get<std::vector<double>>();
    ckpt.rng_state = j.at("rng_state").get<std::string>();
    ckpt.seed = j.at("seed").get<std::uint64_t>();
    ckpt.iterations_done = j.at("iterations_done").get<int>();
  } catch (const json::exception& e) {
    throw IoError("corrupt checkpoint " + path + ": " + e.what());
  }
  return ckpt;
}

}  // namespace avlab
