#pragma once

#include <cstdint>
#include <vector>

#include "shpi/approx/training.hpp"
#include "shpi/env/environment.hpp"
#include "shpi/improve/greedy_policy.hpp"

namespace shpi::harness {

struct SarsaOptions {
  std::size_t episodes = 2000;
  double gamma = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.1;
  std::vector<std::size_t> hidden{32, 32};
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  /// Episodes of uniform play used only to fit the input standardization.
  std::size_t warmup_episodes = 10;
};

/// On-policy one-step SARSA with a per-action Q network. Exploration anneals
/// linearly from epsilon_start to epsilon_end over the episode budget; rewards
/// are divided by env.reward_scale(). Each finished episode is replayed once
/// in shuffled minibatches with targets r + gamma Q(x', a') computed from the
/// current network. Returns the greedy policy (epsilon 0) over the critic.
improve::GreedyPolicy pretrain_behavior(const env::Environment& prototype, const SarsaOptions& options,
                                        std::uint64_t seed);

/// pi(a|x) = eps / |A| + (1 - eps) [a == greedy]; eps = 1 is uniform.
improve::GreedyPolicy corrupt_policy(const improve::GreedyPolicy& policy, double epsilon);

}  // namespace shpi::harness
