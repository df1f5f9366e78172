#include "shpi/improve/baselines.hpp"

namespace shpi::improve {

ShpiResult online_contextual_bandit(const env::Environment& prototype, const Policy& mu, const ShpiConfig& config,
                                    std::uint64_t seed, const PolicyEvaluator& evaluate) {
  config.validate();
  const std::size_t dim = prototype.context_dim();
  const std::size_t n_actions = prototype.action_count();
  const auto probes = probe_contexts(prototype, mu, config.probe_size, derive_seed(seed, "probe-contexts"));
  const TargetFunction immediate = [](const env::Environment&, const env::Environment&, const Step& step) {
    return step.reward;
  };

  ShpiResult result;
  std::optional<GreedyPolicy> previous;
  for (std::size_t j = 1; j <= config.iterations; ++j) {
    GreedyPolicy explorer;
    if (previous) explorer = previous->with_epsilon(config.exploration);
    const Policy& behavior = previous ? static_cast<const Policy&>(explorer) : mu;
    const auto targets = collect_targets(prototype, behavior, config.online_episodes,
                                         derive_seed(derive_seed(seed, "online-collect"), j), immediate);
    GreedyPolicy next =
        regress_policy(targets, dim, n_actions, config, derive_seed(derive_seed(seed, "online-regression"), j));
    IterationMetrics m;
    m.iteration = j;
    m.targets = targets.size();
    for (const auto& t : targets) m.mean_target += t.value / static_cast<double>(targets.size());
    m.policy_change = previous ? policy_change_rate(*previous, next, probes) : 1.0;
    if (evaluate) m.eval_return = evaluate(next);
    result.metrics.push_back(m);
    previous = std::move(next);
  }
  result.policy = *previous;
  result.value = valuation::ValueModel::zero(dim, config.gamma);
  return result;
}

ShpiConfig session_rl_config(ShpiConfig base, std::size_t window_length) {
  base.k = window_length;
  base.bonus_mode = BonusMode::kZero;
  return base;
}

ShpiConfig full_advantage_config(ShpiConfig base, std::size_t window_length) {
  base.k = window_length;
  return base;
}

ShpiConfig contextual_bandit_config(ShpiConfig base) {
  base.k = 1;
  base.bonus_mode = BonusMode::kZero;
  return base;
}

}  // namespace shpi::improve
