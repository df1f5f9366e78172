#include "shpi/improve/shpi.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "shpi/core/dataset_io.hpp"
#include "shpi/improve/density_ratio.hpp"

namespace shpi::improve {

std::string to_string(BonusMode mode) {
  switch (mode) {
    case BonusMode::kFittedValue: return "fitted";
    case BonusMode::kZero: return "zero";
    case BonusMode::kExternal: return "external";
  }
  return "fitted";
}

BonusMode parse_bonus_mode(const std::string& text) {
  if (text == "fitted") return BonusMode::kFittedValue;
  if (text == "zero") return BonusMode::kZero;
  if (text == "external") return BonusMode::kExternal;
  throw std::invalid_argument("unknown bonus mode: " + text);
}

void ShpiConfig::validate() const {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  if (iterations == 0) throw std::invalid_argument("iterations must be at least 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
  if (clip) clip->validate();
  if (!(proximal_lambda >= 0.0)) throw std::invalid_argument("proximal weight must be nonnegative");
  if (!(exploration >= 0.0 && exploration <= 1.0)) throw std::invalid_argument("exploration must lie in [0, 1]");
  if (online_rollouts == 0) throw std::invalid_argument("need at least one rollout per target");
}

void write_metrics(std::ostream& out, const std::vector<IterationMetrics>& metrics) {
  out << "iteration,mean_target,clipped_fraction,policy_change,eval_return,targets\n";
  for (const auto& m : metrics) {
    out << m.iteration << ',' << format_double(m.mean_target) << ',' << format_double(m.clipped_fraction) << ','
        << format_double(m.policy_change) << ',' << (m.eval_return ? format_double(*m.eval_return) : "") << ','
        << m.targets << '\n';
  }
}

void write_metrics(const std::filesystem::path& path, const std::vector<IterationMetrics>& metrics) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  write_metrics(out, metrics);
}

std::vector<Context> probe_contexts(const env::Environment& prototype, const Policy& policy, std::size_t count,
                                    std::uint64_t seed) {
  std::vector<Context> out;
  out.reserve(count);
  auto sim = prototype.clone();
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t s = derive_seed(seed, i);
    sim->reset(derive_seed(s, "reset"));
    Rng rng(derive_seed(s, "walk"));
    const std::size_t stop = uniform_index(rng, sim->horizon());
    while (sim->time() < stop) sim->step(policy.sample(sim->context(), rng));
    out.push_back(sim->context());
  }
  return out;
}

std::vector<Context> probe_contexts(const Dataset& dataset, std::size_t count, std::uint64_t seed) {
  if (dataset.empty()) throw std::invalid_argument("empty dataset");
  Rng rng(derive_seed(seed, "dataset-probes"));
  std::vector<Context> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Trajectory& traj = dataset.trajectories[uniform_index(rng, dataset.trajectories.size())];
    out.push_back(traj[uniform_index(rng, traj.size())].context);
  }
  return out;
}

double policy_change_rate(const GreedyPolicy& a, const GreedyPolicy& b, const std::vector<Context>& contexts) {
  if (contexts.empty()) return 0.0;
  std::size_t changed = 0;
  for (const Context& x : contexts) changed += a.greedy_action(x) != b.greedy_action(x) ? 1 : 0;
  return static_cast<double>(changed) / static_cast<double>(contexts.size());
}

GreedyPolicy regress_policy(const std::vector<Target>& targets, std::size_t context_dim, std::size_t action_count,
                            const ShpiConfig& config, std::uint64_t seed) {
  std::vector<approx::Sample> samples;
  samples.reserve(targets.size());
  for (const Target& t : targets) samples.push_back({t.context.view(), t.value, 1.0, t.action});
  if (config.state_baseline && !samples.empty()) {
    auto base = config.hidden.empty() ? approx::Regressor::linear(context_dim, 1)
                                      : approx::Regressor::feedforward(context_dim, 1, config.hidden);
    base.initialize(derive_seed(seed, "baseline-init"));
    std::vector<approx::Sample> pooled = samples;
    for (auto& s : pooled) s.head = 0;
    approx::TrainOptions train = config.regression;
    train.seed = derive_seed(seed, "baseline-train");
    base = approx::fit_squared_loss(std::move(base), pooled, train).model;
    for (auto& s : samples) s.target -= base.predict_head(s.x, 0);
  }
  auto model = config.hidden.empty() ? approx::Regressor::linear(context_dim, action_count)
                                     : approx::Regressor::feedforward(context_dim, action_count, config.hidden);
  model.initialize(derive_seed(seed, "scorer-init"));
  approx::TrainOptions train = config.regression;
  train.seed = derive_seed(seed, "scorer-train");
  return GreedyPolicy(approx::fit_squared_loss(std::move(model), samples, train).model, 0.0);
}

std::vector<Target> collect_targets(const env::Environment& prototype, const Policy& behavior,
                                    std::size_t episodes, std::uint64_t episode_seed, const TargetFunction& target,
                                    std::vector<std::vector<Step>>* streams) {
  std::vector<Target> out;
  auto sim = prototype.clone();
  for (std::size_t e = 0; e < episodes; ++e) {
    const std::uint64_t s = derive_seed(episode_seed, e);
    sim->reset(derive_seed(s, "reset"));
    Rng rng(derive_seed(s, "actions"));
    std::vector<Step> stream;
    while (!sim->done()) {
      auto before = sim->clone();
      Step step;
      step.context = sim->context();
      step.time_index = sim->time();
      step.action = behavior.sample(step.context, rng);
      step.propensity = behavior.probability(step.context, step.action);
      step.reward = sim->step(step.action).reward;
      out.push_back({step.context, step.action, target(*before, *sim, step)});
      if (streams != nullptr) stream.push_back(std::move(step));
    }
    if (streams != nullptr) streams->push_back(std::move(stream));
  }
  return out;
}

namespace {

GreedyPolicy with_exploration(const GreedyPolicy& p, double epsilon) { return p.with_epsilon(epsilon); }

double mean_of(const std::vector<Target>& targets) {
  if (targets.empty()) return 0.0;
  double total = 0.0;
  for (const auto& t : targets) total += t.value;
  return total / static_cast<double>(targets.size());
}

valuation::ValueModel refit_value(const Dataset& dataset, const ShpiConfig& config, std::uint64_t seed) {
  const std::size_t dim = dataset.trajectories.front()[0].context.dim();
  auto model = config.value_hidden.empty() ? approx::Regressor::linear(dim, 1)
                                           : approx::Regressor::feedforward(dim, 1, config.value_hidden);
  model.initialize(derive_seed(seed, "value-init"));
  valuation::ValueFitOptions options = config.value_fit;
  options.train.seed = derive_seed(seed, "value-train");
  return valuation::fit_value(dataset, std::move(model), options);
}

}  // namespace

ShpiResult online_shpi(const env::Environment& prototype, const Policy& mu, Dataset dataset,
                       valuation::ValueModel value, const ShpiConfig& config, std::uint64_t seed,
                       const PolicyEvaluator& evaluate) {
  config.validate();
  const std::size_t dim = prototype.context_dim();
  const std::size_t n_actions = prototype.action_count();
  if (config.bonus_mode == BonusMode::kZero) value = valuation::ValueModel::zero(dim, config.gamma);
  const auto probes = probe_contexts(prototype, mu, config.probe_size, derive_seed(seed, "probe-contexts"));

  ShpiResult result;
  std::optional<GreedyPolicy> previous;
  for (std::size_t j = 1; j <= config.iterations; ++j) {
    GreedyPolicy explorer;
    if (previous) explorer = with_exploration(*previous, config.exploration);
    const Policy& behavior = previous ? static_cast<const Policy&>(explorer) : mu;
    const std::uint64_t rollout_seed = derive_seed(derive_seed(seed, "online-rollouts"), j);
    std::size_t visited = 0;

    // Rollout 0 continues from the actually observed transition, so with a
    // single rollout the immediate reward is exactly the logged one.
    const TargetFunction target = [&](const env::Environment& before, const env::Environment& after,
                                      const Step& step) {
      const std::uint64_t s = derive_seed(rollout_seed, visited++);
      const double gamma = config.gamma;
      double first = step.reward, discount = gamma;
      if (config.k > 1 && !after.done()) {
        auto sim = after.clone();
        sim->reseed(derive_seed(s, "continuation-env"));
        Rng rng(derive_seed(s, "continuation-policy"));
        for (std::size_t m = 1; m < config.k && !sim->done(); ++m) {
          first += discount * sim->step(behavior.sample(sim->context(), rng)).reward;
          discount *= gamma;
        }
        if (!sim->done()) first += discount * value(sim->context());
      } else if (!after.done()) {
        first += discount * value(after.context());
      }
      first -= value(step.context);
      if (config.online_rollouts == 1) return first;
      const auto rest = advantages::online_k_advantage(before, behavior, value, step.action, config.k, gamma,
                                                       config.online_rollouts - 1, derive_seed(s, "extra"));
      return (first + rest.mean * static_cast<double>(config.online_rollouts - 1)) /
             static_cast<double>(config.online_rollouts);
    };

    std::vector<std::vector<Step>> streams;
    const auto targets = collect_targets(prototype, behavior, config.online_episodes,
                                         derive_seed(derive_seed(seed, "online-collect"), j), target, &streams);
    GreedyPolicy next =
        regress_policy(targets, dim, n_actions, config, derive_seed(derive_seed(seed, "online-regression"), j));

    IterationMetrics m;
    m.iteration = j;
    m.mean_target = mean_of(targets);
    m.targets = targets.size();
    m.policy_change = previous ? policy_change_rate(*previous, next, probes) : 1.0;
    if (evaluate) m.eval_return = evaluate(next);
    result.metrics.push_back(m);
    previous = std::move(next);

    if (config.update_value_each_iter && config.bonus_mode == BonusMode::kFittedValue) {
      const std::size_t window = dataset.empty() ? prototype.horizon() : dataset.window_length;
      for (std::size_t e = 0; e < streams.size(); ++e) {
        Dataset fresh = window_stream(streams[e], window, dataset.empty() ? window : dataset.window_step,
                                      config.gamma, n_actions, e);
        if (dataset.empty()) {
          dataset = std::move(fresh);
        } else {
          dataset.append(fresh);
        }
      }
      value = refit_value(dataset, config, derive_seed(derive_seed(seed, "online-value"), j));
    }
  }
  result.policy = *previous;
  result.value = std::move(value);
  return result;
}

ShpiResult offline_shpi(const Dataset& dataset, valuation::ValueModel value, const ShpiConfig& config,
                        std::uint64_t seed, const PolicyEvaluator& evaluate, const env::Environment* pi_env) {
  config.validate();
  if (dataset.empty()) throw std::invalid_argument("empty dataset");
  if (config.k > dataset.window_length) throw std::invalid_argument("k exceeds the window length");
  dataset.validate();
  const std::size_t dim = dataset.trajectories.front()[0].context.dim();
  const std::size_t n_actions = dataset.action_count;
  if (config.bonus_mode == BonusMode::kZero) value = valuation::ValueModel::zero(dim, dataset.gamma);
  const auto probes = probe_contexts(dataset, config.probe_size, derive_seed(seed, "probe-contexts"));

  auto initial = config.hidden.empty() ? approx::Regressor::linear(dim, n_actions)
                                       : approx::Regressor::feedforward(dim, n_actions, config.hidden);
  initial.initialize(derive_seed(seed, "initial-policy"));
  GreedyPolicy current(std::move(initial), 0.0);

  advantages::OfflineOptions options;
  options.k = config.k;
  options.clip = config.clip;
  options.clip_mode = config.clip_mode;
  options.bonus_weight = config.bonus_weight;

  std::vector<Context> mu_states;
  bool proximal = config.proximal_lambda > 0.0;
  if (proximal) {
    mu_states = probe_contexts(dataset, config.ratio_states, derive_seed(seed, "ratio-mu-states"));
  }

  ShpiResult result;
  for (std::size_t j = 1; j <= config.iterations; ++j) {
    advantages::AdvantageTable table = advantages::offline_k_advantages(dataset, current, value, options);
    if (proximal) {
      const std::uint64_t s = derive_seed(derive_seed(seed, "ratio"), j);
      std::vector<Context> pi_states =
          pi_env != nullptr ? probe_contexts(*pi_env, current, config.ratio_states, s)
                            : resample_states(dataset, current, config.ratio_states, s, config.min_effective_size);
      if (pi_states.empty()) {
        std::cerr << "warning: too few effective pi-state samples; proximal term disabled\n";
        proximal = false;
      } else {
        const DensityRatioModel ratio = fit_density_ratio(mu_states, pi_states, s);
        if (!ratio.reliable) std::cerr << "warning: density ratio estimates are large and may be unreliable\n";
        table = proximal_targets(table, ratio, config.proximal_lambda);
      }
    }

    std::vector<Target> targets;
    targets.reserve(table.entries.size());
    for (auto& e : table.entries) targets.push_back({std::move(e.context), e.action, e.estimate});
    GreedyPolicy next =
        regress_policy(targets, dim, n_actions, config, derive_seed(derive_seed(seed, "offline-regression"), j));

    IterationMetrics m;
    m.iteration = j;
    m.mean_target = mean_of(targets);
    m.clipped_fraction = table.clipped_fraction;
    m.targets = targets.size();
    m.policy_change = policy_change_rate(current, next, probes);
    if (evaluate) m.eval_return = evaluate(next);
    result.metrics.push_back(m);
    current = std::move(next);
    if (config.stop_at_fixed_point && m.policy_change == 0.0) break;
  }
  result.policy = std::move(current);
  result.value = std::move(value);
  return result;
}

}  // namespace shpi::improve
