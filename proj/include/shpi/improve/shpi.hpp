#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "shpi/advantages/advantages.hpp"
#include "shpi/env/environment.hpp"
#include "shpi/improve/greedy_policy.hpp"
#include "shpi/valuation/value_model.hpp"

namespace shpi::improve {

enum class Mode { kOnline, kOffline };
enum class BonusMode {
  kFittedValue,  ///< V fitted on the logged data
  kZero,         ///< no bonus: session-based episodic RL
  kExternal,     ///< a value model supplied from outside
};

std::string to_string(BonusMode mode);
BonusMode parse_bonus_mode(const std::string& text);

struct ShpiConfig {
  std::size_t k = 5;
  std::size_t iterations = 10;  ///< J
  double gamma = 0.99;          ///< online only; offline uses the dataset's
  std::optional<advantages::ClipBounds> clip = advantages::ClipBounds{};
  advantages::ClipMode clip_mode = advantages::ClipMode::kCumulative;
  advantages::BonusWeight bonus_weight = advantages::BonusWeight::kThroughBonus;
  Mode mode = Mode::kOffline;
  BonusMode bonus_mode = BonusMode::kFittedValue;

  double proximal_lambda = 0.0;
  std::size_t ratio_states = 2000;
  double min_effective_size = 50.0;

  bool update_value_each_iter = false;
  valuation::ValueFitOptions value_fit{};
  std::vector<std::size_t> value_hidden{32, 32};

  std::vector<std::size_t> hidden{32, 32};
  approx::TrainOptions regression{};
  /// Fit a shared state baseline g(x) first and regress target - g(x) per action.
  /// The greedy action is unchanged by any per-context shift, so this only
  /// removes the large action-independent part from the per-action fit.
  bool state_baseline = true;

  /// Uniform exploration mixed into collection and deployed policies.
  double exploration = 0.05;
  std::size_t online_episodes = 10;  ///< episodes collected per online iteration
  std::size_t online_rollouts = 1;   ///< Monte Carlo rollouts per online target
  std::size_t probe_size = 512;
  bool stop_at_fixed_point = true;

  void validate() const;
};

struct IterationMetrics {
  std::size_t iteration = 0;
  double mean_target = 0.0;
  double clipped_fraction = 0.0;
  double policy_change = 0.0;  ///< share of probe contexts whose action changed
  std::optional<double> eval_return;
  std::size_t targets = 0;
};

struct ShpiResult {
  GreedyPolicy policy;
  std::vector<IterationMetrics> metrics;
  valuation::ValueModel value;
};

using PolicyEvaluator = std::function<double(const GreedyPolicy&)>;

/// `iteration,mean_target,clipped_fraction,policy_change,eval_return,targets`.
void write_metrics(std::ostream& out, const std::vector<IterationMetrics>& metrics);
void write_metrics(const std::filesystem::path& path, const std::vector<IterationMetrics>& metrics);

/// Contexts visited by `policy`, drawn at uniform times of fresh episodes.
std::vector<Context> probe_contexts(const env::Environment& prototype, const Policy& policy, std::size_t count,
                                    std::uint64_t seed);
/// Uniform sample (with replacement) of the dataset's contexts.
std::vector<Context> probe_contexts(const Dataset& dataset, std::size_t count, std::uint64_t seed);

/// Share of contexts on which two policies pick different greedy actions.
double policy_change_rate(const GreedyPolicy& a, const GreedyPolicy& b, const std::vector<Context>& contexts);

/// One regression sample per logged decision.
struct Target {
  Context context;
  std::size_t action = 0;
  double value = 0.0;
};

/// Fits a fresh per-action scorer to the targets and returns its greedy policy.
GreedyPolicy regress_policy(const std::vector<Target>& targets, std::size_t context_dim, std::size_t action_count,
                            const ShpiConfig& config, std::uint64_t seed);

/// Called at every collected step with snapshots taken just before and just
/// after it; returns the regression target for that step.
using TargetFunction =
    std::function<double(const env::Environment& before, const env::Environment& after, const Step& step)>;

/// Runs `episodes` episodes of `behavior`; `episode_seed` keys the episodes so
/// that learners sharing it see identical interaction streams. Appends the
/// visited steps, one stream per episode, to `streams` when given.
std::vector<Target> collect_targets(const env::Environment& prototype, const Policy& behavior,
                                    std::size_t episodes, std::uint64_t episode_seed, const TargetFunction& target,
                                    std::vector<std::vector<Step>>* streams = nullptr);

/// Online policy iteration with Monte Carlo k-step advantages. Iteration 1
/// collects with mu; later iterations with the previous greedy policy mixed
/// with config.exploration. Rollouts after the logged action follow the
/// collecting policy.
ShpiResult online_shpi(const env::Environment& prototype, const Policy& mu, Dataset dataset,
                       valuation::ValueModel value, const ShpiConfig& config, std::uint64_t seed,
                       const PolicyEvaluator& evaluate = {});

/// Offline policy iteration on importance-weighted k-step advantages.
/// pi^(0) is a greedy policy over a randomly initialized scorer. `pi_env`
/// optionally supplies a simulator for the pi-state samples of the proximal
/// term; without it they are resampled from the dataset.
ShpiResult offline_shpi(const Dataset& dataset, valuation::ValueModel value, const ShpiConfig& config,
                        std::uint64_t seed, const PolicyEvaluator& evaluate = {},
                        const env::Environment* pi_env = nullptr);

}  // namespace shpi::improve
