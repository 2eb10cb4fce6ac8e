#ifndef AVLAB_CHECKPOINT_HPP
#define AVLAB_CHECKPOINT_HPP

#include <memory>
#include <string>

#include "avlab/ppo.hpp"

namespace avlab {

/// Everything needed to resume or evaluate a trained agent.
struct Checkpoint {
  int version = 1;
  int obs_dim = 0;
  std::vector<int> hidden = {64, 64};
  Hyperparams hyper;
  std::vector<double> policy_params;
  double log_std = GaussianPolicy::kLogStdInit;
  std::vector<double> value_params;
  std::string rng_state;  // master training stream, serialized
  std::uint64_t seed = 0;
  int iterations_done = 0;
};

Checkpoint make_checkpoint(const GaussianPolicy& policy, const ValueFunction& value,
                           const Hyperparams& hp, std::uint64_t seed,
                           int iterations_done, const std::string& rng_state);

/// Rebuild policy/value networks with the stored parameters.
std::pair<std::unique_ptr<GaussianPolicy>, std::unique_ptr<ValueFunction>>
restore_networks(const Checkpoint& ckpt);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace avlab

#endif
