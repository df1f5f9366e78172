#include "shpi/advantages/diagnostics.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "shpi/core/dataset_io.hpp"

namespace shpi::advantages {

double bias_bound(std::size_t k, double gamma, std::size_t t, std::size_t horizon, double q2, double eps_r,
                  double eps_w, double eps_v_t, double eps_v_tk, double r_max) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("bias bound needs gamma in [0, 1)");
  if (eps_r < 0.0 || eps_w < 0.0 || eps_v_t < 0.0 || eps_v_tk < 0.0) {
    throw std::invalid_argument("error magnitudes must be nonnegative");
  }
  const double gk = std::pow(gamma, static_cast<double>(k));
  const double reward_term = (1.0 - gk) / (1.0 - gamma) * q2 * eps_r;
  const double weight_term = (1.0 - gk + std::pow(gamma, static_cast<double>(t + k)) -
                              std::pow(gamma, static_cast<double>(horizon + 1))) /
                             (1.0 - gamma) * std::abs(r_max) * eps_w;
  return reward_term + weight_term + gk * q2 * eps_v_tk + eps_v_t;
}

std::string to_string(MseTruth truth) { return truth == MseTruth::kLongTerm ? "long-term" : "k-step"; }

MseTruth parse_mse_truth(const std::string& text) {
  if (text == "long-term") return MseTruth::kLongTerm;
  if (text == "k-step") return MseTruth::kKStep;
  throw std::invalid_argument("unknown advantage truth: " + text);
}

std::vector<std::unique_ptr<env::Environment>> sample_probe_states(const env::Environment& prototype,
                                                                   const Policy& mu, std::size_t count,
                                                                   std::uint64_t seed) {
  std::vector<std::unique_ptr<env::Environment>> probes;
  probes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t probe_seed = derive_seed(seed, i);
    auto sim = prototype.clone();
    sim->reset(derive_seed(probe_seed, "reset"));
    Rng rng(derive_seed(probe_seed, "walk"));
    const std::size_t stop = uniform_index(rng, sim->horizon());
    while (sim->time() < stop) sim->step(mu.sample(sim->context(), rng));
    probes.push_back(std::move(sim));
  }
  return probes;
}

std::vector<MseRow> advantage_mse_diagnostic(const env::Environment& prototype, const Dataset& dataset,
                                             const Policy& mu, const Policy& pi,
                                             const valuation::ValueModel& value, const MseOptions& options) {
  if (options.n_probes == 0 || options.n_truth_rollouts == 0) {
    throw std::invalid_argument("need probes and truth rollouts");
  }
  const double gamma = dataset.gamma;
  auto probes = sample_probe_states(prototype, mu, options.n_probes, derive_seed(options.seed, "probes"));

  std::vector<std::size_t> actions(probes.size());
  std::vector<double> baseline(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) {
    Rng rng(derive_seed(derive_seed(options.seed, "probe-action"), i));
    actions[i] = mu.sample(probes[i]->context(), rng);
    baseline[i] = rollout_return(*probes[i], std::nullopt, mu, 0, mu, gamma, options.n_truth_rollouts,
                                 derive_seed(derive_seed(options.seed, "truth"), i))
                      .mean;
  }

  std::vector<MseRow> rows;
  std::vector<double> long_term, k_step;
  for (std::size_t k : options.k_list) {
    OfflineOptions offline;
    offline.k = k;
    offline.clip = options.clip;
    offline.bonus_weight = options.bonus_weight;
    const AdvantageTable table = offline_k_advantages(dataset, pi, value, offline);
    std::vector<approx::Sample> samples;
    samples.reserve(table.entries.size());
    for (const auto& e : table.entries) samples.push_back({e.context.view(), e.estimate, 1.0, e.action});
    auto model = approx::Regressor::feedforward(dataset.trajectories.front()[0].context.dim(),
                                                dataset.action_count, options.hidden);
    model.initialize(derive_seed(options.seed, "mse-regressor"));
    approx::TrainOptions train = options.train;
    train.seed = derive_seed(options.seed, "mse-train");
    const approx::Regressor fitted = approx::fit_squared_loss(std::move(model), samples, train).model;

    const bool full = options.truth == MseTruth::kLongTerm || k >= dataset.window_length;
    const std::size_t head_steps = full ? std::numeric_limits<std::size_t>::max() : k - 1;
    if (!full || long_term.empty()) {
      std::vector<double>& truth = full ? long_term : k_step;
      truth.resize(probes.size());
      for (std::size_t i = 0; i < probes.size(); ++i) {
        truth[i] = rollout_return(*probes[i], actions[i], pi, head_steps, mu, gamma, options.n_truth_rollouts,
                                  derive_seed(derive_seed(options.seed, "truth"), i))
                       .mean -
                   baseline[i];
      }
    }
    const std::vector<double>& truth = full ? long_term : k_step;
    std::vector<double> errors(probes.size());
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const double e = fitted.predict_head(probes[i]->context().view(), actions[i]) - truth[i];
      errors[i] = e * e;
    }
    double mean = 0.0, sq = 0.0;
    for (double e : errors) mean += e;
    mean /= static_cast<double>(errors.size());
    for (double e : errors) sq += (e - mean) * (e - mean);
    const double n = static_cast<double>(errors.size());
    rows.push_back({k, mean, errors.size() > 1 ? std::sqrt(sq / (n - 1.0) / n) : 0.0});
  }
  return rows;
}

void write_mse_table(std::ostream& out, const std::vector<MseRow>& rows) {
  out << "k,mse,stderr\n";
  for (const auto& r : rows) out << r.k << ',' << format_double(r.mse) << ',' << format_double(r.stderr_) << '\n';
}

void write_mse_table(const std::filesystem::path& path, const std::vector<MseRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  write_mse_table(out, rows);
}

}  // namespace shpi::advantages
