#include "shpi/advantages/advantages.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "shpi/core/dataset_io.hpp"

namespace shpi::advantages {

namespace {

double ratio(const Policy& pi, const Step& step) {
  if (!(step.propensity > 0.0)) throw std::invalid_argument("logged propensity must be positive");
  return pi.probability(step.context, step.action) / step.propensity;
}

MonteCarloEstimate summarize(const std::vector<double>& values) {
  MonteCarloEstimate est;
  est.samples = values.size();
  if (values.empty()) return est;
  double sum = 0.0;
  for (double v : values) sum += v;
  est.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - est.mean) * (v - est.mean);
    est.stderr_ = std::sqrt(sq / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
  }
  return est;
}

}  // namespace

void ClipBounds::validate() const {
  if (!(q1 > 0.0 && q1 <= 1.0 && 1.0 <= q2)) throw std::invalid_argument("clip bounds need 0 < q1 <= 1 <= q2");
}

double importance_weight(const Policy& pi, const Trajectory& trajectory, std::size_t t1, std::size_t t2,
                         const std::optional<ClipBounds>& clip, ClipMode mode) {
  if (t1 > t2) return 1.0;
  if (t2 >= trajectory.size()) throw std::out_of_range("importance weight window exceeds the trajectory");
  if (clip) clip->validate();
  double w = 1.0;
  for (std::size_t m = t1; m <= t2; ++m) {
    const double r = ratio(pi, trajectory[m]);
    w *= (clip && mode == ClipMode::kPerFactor) ? clip->apply(r) : r;
  }
  return clip ? clip->apply(w) : w;
}

double AdvantageTable::mean_estimate() const {
  if (entries.empty()) return 0.0;
  double total = 0.0;
  for (const auto& e : entries) total += e.estimate;
  return total / static_cast<double>(entries.size());
}

AdvantageTable offline_k_advantages(const Dataset& dataset, const Policy& pi, const valuation::ValueModel& value,
                                    const OfflineOptions& options) {
  const std::size_t k = options.k;
  const std::size_t window = dataset.window_length;
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  if (k > window) throw std::invalid_argument("k exceeds the window length");
  if (options.clip) options.clip->validate();
  const bool window_end = k == window;
  const double gamma = dataset.gamma;

  AdvantageTable table;
  table.k = k;
  table.gamma = gamma;
  std::size_t weight_evaluations = 0, clipped = 0;
  std::vector<double> ratios(window), cumulative(window + 1);

  for (std::size_t id = 0; id < dataset.trajectories.size(); ++id) {
    const Trajectory& traj = dataset.trajectories[id];
    if (traj.size() != window) throw std::invalid_argument("trajectory length differs from the window length");
    for (std::size_t m = 0; m < window; ++m) ratios[m] = ratio(pi, traj[m]);

    const std::size_t positions = window_end ? window : window - k;
    for (std::size_t t = 0; t < positions; ++t) {
      const std::size_t steps = window_end ? window - t : k;
      // cumulative[m] = (clipped) w_{t+1}^{t+m}; cumulative[0] = 1 by convention
      cumulative[0] = 1.0;
      double raw = 1.0;
      const std::size_t last = std::min(steps, window - 1 - t);
      for (std::size_t m = 1; m <= last; ++m) {
        ++weight_evaluations;
        if (!options.clip) {
          raw *= ratios[t + m];
          cumulative[m] = raw;
          continue;
        }
        const double r = ratios[t + m];
        raw *= options.clip_mode == ClipMode::kPerFactor ? options.clip->apply(r) : r;
        const double c = options.clip->apply(raw);
        if (c != raw || (options.clip_mode == ClipMode::kPerFactor && options.clip->apply(r) != r)) ++clipped;
        cumulative[m] = c;
      }

      double estimate = 0.0, discount = 1.0;
      for (std::size_t m = 0; m < steps; ++m) {
        estimate += cumulative[m] * discount * traj[t + m].reward;
        discount *= gamma;
      }
      if (!window_end) {
        const std::size_t bonus_index = options.bonus_weight == BonusWeight::kReachedState ? k - 1 : k;
        estimate += cumulative[bonus_index] * discount * value(traj[t + k].context);
      }
      estimate -= value(traj[t].context);
      if (!std::isfinite(estimate)) throw std::runtime_error("non-finite advantage estimate");
      table.entries.push_back({id, t, traj[t].context, traj[t].action, estimate});
    }
  }
  table.clipped_fraction =
      weight_evaluations == 0 ? 0.0 : static_cast<double>(clipped) / static_cast<double>(weight_evaluations);
  return table;
}

void write_advantage_table(std::ostream& out, const AdvantageTable& table) {
  out << "episode_id,t,action,estimate\n";
  for (const auto& e : table.entries) {
    out << e.trajectory << ',' << e.t << ',' << e.action << ',' << format_double(e.estimate) << '\n';
  }
}

void write_advantage_table(const std::filesystem::path& path, const AdvantageTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  write_advantage_table(out, table);
}

MonteCarloEstimate online_k_advantage(const env::Environment& env, const Policy& pi,
                                      const valuation::ValueModel& value, std::size_t action, std::size_t k,
                                      double gamma, std::size_t n_rollouts, std::uint64_t seed) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  if (env.done()) throw std::logic_error("cannot roll out from a finished episode");
  if (n_rollouts == 0) throw std::invalid_argument("need at least one rollout");
  const double baseline = value(env.context());
  std::vector<double> samples;
  samples.reserve(n_rollouts);
  for (std::size_t i = 0; i < n_rollouts; ++i) {
    auto sim = env.clone();
    sim->reseed(derive_seed(derive_seed(seed, "env"), i));
    Rng rng(derive_seed(derive_seed(seed, "policy"), i));
    double total = 0.0, discount = 1.0;
    env::EnvStep step = sim->step(action);
    total += step.reward;
    discount *= gamma;
    for (std::size_t m = 1; m < k && !step.done; ++m) {
      step = sim->step(pi.sample(sim->context(), rng));
      total += discount * step.reward;
      discount *= gamma;
    }
    if (!step.done) total += discount * value(sim->context());
    samples.push_back(total - baseline);
  }
  return summarize(samples);
}

MonteCarloEstimate rollout_return(const env::Environment& env, std::optional<std::size_t> first_action,
                                  const Policy& head, std::size_t head_steps, const Policy& tail, double gamma,
                                  std::size_t n_rollouts, std::uint64_t seed) {
  if (n_rollouts == 0) throw std::invalid_argument("need at least one rollout");
  std::vector<double> samples;
  samples.reserve(n_rollouts);
  for (std::size_t i = 0; i < n_rollouts; ++i) {
    auto sim = env.clone();
    sim->reseed(derive_seed(derive_seed(seed, "env"), i));
    Rng rng(derive_seed(derive_seed(seed, "policy"), i));
    double total = 0.0, discount = 1.0;
    std::size_t taken = 0;
    if (first_action && !sim->done()) {
      total += sim->step(*first_action).reward;
      discount *= gamma;
    }
    while (!sim->done()) {
      const Policy& policy = taken < head_steps ? head : tail;
      total += discount * sim->step(policy.sample(sim->context(), rng)).reward;
      discount *= gamma;
      ++taken;
    }
    samples.push_back(total);
  }
  return summarize(samples);
}

}  // namespace shpi::advantages
