#include "shpi/harness/evaluation.hpp"

#include <cmath>
#include <stdexcept>

#include "shpi/core/rng.hpp"

namespace shpi::harness {

Dataset collect(const env::Environment& prototype, const Policy& policy, std::size_t episodes,
                std::size_t window, std::size_t stride, double gamma, std::uint64_t seed) {
  if (episodes == 0) throw std::invalid_argument("need at least one episode");
  auto sim = prototype.clone();
  Dataset out;
  out.window_length = window;
  out.window_step = stride;
  out.gamma = gamma;
  out.action_count = sim->action_count();
  std::vector<double> probs(sim->action_count());
  for (std::size_t e = 0; e < episodes; ++e) {
    const std::uint64_t s = derive_seed(seed, e);
    sim->reset(derive_seed(s, "reset"));
    Rng rng(derive_seed(s, "actions"));
    std::vector<Step> stream;
    stream.reserve(sim->horizon());
    while (!sim->done()) {
      Step step;
      step.context = sim->context();
      step.time_index = sim->time();
      policy.probabilities(step.context, probs);
      step.action = policy.sample(step.context, rng);
      step.propensity = probs[step.action];
      if (!(step.propensity > 0.0)) throw std::logic_error("sampled an action with zero propensity");
      step.reward = sim->step(step.action).reward;
      stream.push_back(std::move(step));
    }
    out.append(window_stream(stream, window, stride, gamma, out.action_count, e));
  }
  return out;
}

Dataset corrupt_rewards(Dataset dataset, double bias_mean, double bias_std, std::size_t refresh_period,
                        std::uint64_t seed) {
  if (refresh_period == 0) throw std::invalid_argument("refresh period must be at least 1");
  if (bias_std < 0.0) throw std::invalid_argument("bias std must be nonnegative");
  const std::uint64_t base = derive_seed(seed, "reward-bias");
  for (Trajectory& traj : dataset.trajectories) {
    for (Step& step : traj.steps) {
      const std::uint64_t block = step.time_index / refresh_period;
      double bias = bias_mean;
      if (bias_std > 0.0) {
        Rng rng(derive_seed(derive_seed(base, traj.stream_id), block));
        bias += bias_std * standard_normal(rng);
      }
      step.reward += bias;
    }
  }
  return dataset;
}

std::string to_string(MetricMode mode) {
  switch (mode) {
    case MetricMode::kDelta: return "delta";
    case MetricMode::kMeanPerStep: return "mean-per-step";
    case MetricMode::kSum: return "sum";
  }
  return "sum";
}

MetricMode parse_metric_mode(const std::string& text) {
  if (text == "delta") return MetricMode::kDelta;
  if (text == "mean-per-step") return MetricMode::kMeanPerStep;
  if (text == "sum") return MetricMode::kSum;
  throw std::invalid_argument("unknown metric mode: " + text);
}

double EvalReport::standard_error() const {
  return per_seed.empty() ? 0.0 : std / std::sqrt(static_cast<double>(per_seed.size()));
}

double episode_metric(const std::vector<double>& rewards, MetricMode mode) {
  if (rewards.empty()) return 0.0;
  switch (mode) {
    case MetricMode::kDelta: return rewards.back() - rewards.front();
    case MetricMode::kMeanPerStep: {
      double total = 0.0;
      for (double r : rewards) total += r;
      return total / static_cast<double>(rewards.size());
    }
    case MetricMode::kSum: {
      double total = 0.0;
      for (double r : rewards) total += r;
      return total;
    }
  }
  return 0.0;
}

EvalReport evaluate(const env::Environment& prototype, const Policy& policy, std::size_t n_rollouts,
                    MetricMode mode, const std::vector<std::uint64_t>& seeds) {
  if (n_rollouts == 0 || seeds.empty()) throw std::invalid_argument("need rollouts and seeds");
  EvalReport report;
  report.mode = mode;
  auto sim = prototype.clone();
  std::vector<double> rewards;
  for (std::uint64_t seed : seeds) {
    double total = 0.0;
    for (std::size_t i = 0; i < n_rollouts; ++i) {
      const std::uint64_t s = derive_seed(derive_seed(seed, "evaluate"), i);
      sim->reset(derive_seed(s, "reset"));
      Rng rng(derive_seed(s, "actions"));
      rewards.clear();
      while (!sim->done()) rewards.push_back(sim->step(policy.sample(sim->context(), rng)).reward);
      total += episode_metric(rewards, mode);
    }
    report.per_seed.push_back(total / static_cast<double>(n_rollouts));
  }
  for (double v : report.per_seed) report.mean += v;
  report.mean /= static_cast<double>(report.per_seed.size());
  if (report.per_seed.size() > 1) {
    double sq = 0.0;
    for (double v : report.per_seed) sq += (v - report.mean) * (v - report.mean);
    report.std = std::sqrt(sq / static_cast<double>(report.per_seed.size() - 1));
  }
  return report;
}

}  // namespace shpi::harness
