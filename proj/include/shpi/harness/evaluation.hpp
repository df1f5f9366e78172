#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shpi/core/policy.hpp"
#include "shpi/core/types.hpp"
#include "shpi/env/environment.hpp"

namespace shpi::harness {

/// Runs `episodes` episodes of `policy`, records every step with its
/// propensity and cuts each episode's stream into windows (stream_id is the
/// episode number). Throws when the policy samples a zero-propensity action.
Dataset collect(const env::Environment& prototype, const Policy& policy, std::size_t episodes,
                std::size_t window, std::size_t stride, double gamma, std::uint64_t seed);

/// Adds bias b(stream, floor(time_index / period)) ~ N(mean, std^2) to every
/// reward. The bias depends only on the stream and time block, so overlapping
/// windows agree on it.
Dataset corrupt_rewards(Dataset dataset, double bias_mean, double bias_std, std::size_t refresh_period,
                        std::uint64_t seed);

enum class MetricMode {
  kDelta,        ///< last reward minus first reward of the episode
  kMeanPerStep,  ///< average reward
  kSum,          ///< undiscounted return
};

std::string to_string(MetricMode mode);
MetricMode parse_metric_mode(const std::string& text);

struct EvalReport {
  std::vector<double> per_seed;  ///< mean metric over the rollouts of each seed
  double mean = 0.0;             ///< mean of per_seed
  double std = 0.0;              ///< sample standard deviation of per_seed
  MetricMode mode = MetricMode::kSum;

  double standard_error() const;
};

double episode_metric(const std::vector<double>& rewards, MetricMode mode);

/// n_rollouts episodes per seed on true environment rewards.
EvalReport evaluate(const env::Environment& prototype, const Policy& policy, std::size_t n_rollouts,
                    MetricMode mode, const std::vector<std::uint64_t>& seeds);

}  // namespace shpi::harness
