#include "shpi/improve/density_ratio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shpi::improve {

double DensityRatioModel::log_ratio(std::span<const double> x) const {
  return classifier.predict_head(x, 0) - log_prior_ratio;
}

DensityRatioModel fit_density_ratio(const std::vector<Context>& mu_states, const std::vector<Context>& pi_states,
                                    std::uint64_t seed, const DensityRatioOptions& options) {
  if (mu_states.empty() || pi_states.empty()) {
    throw std::invalid_argument("density ratio needs samples from both distributions");
  }
  const std::size_t dim = mu_states.front().dim();
  std::vector<approx::Sample> samples;
  samples.reserve(mu_states.size() + pi_states.size());
  for (const Context& x : mu_states) samples.push_back({x.view(), 0.0, 1.0, 0});
  for (const Context& x : pi_states) samples.push_back({x.view(), 1.0, 1.0, 0});

  auto model = options.hidden.empty() ? approx::Regressor::linear(dim, 1)
                                      : approx::Regressor::feedforward(dim, 1, options.hidden);
  model.initialize(derive_seed(seed, "density-ratio-init"));
  approx::TrainOptions train = options.train;
  train.seed = derive_seed(seed, "density-ratio-train");

  DensityRatioModel out;
  out.classifier = approx::fit_logistic(std::move(model), samples, train).model;
  out.log_prior_ratio =
      std::log(static_cast<double>(pi_states.size()) / static_cast<double>(mu_states.size()));

  std::vector<double> magnitude;
  magnitude.reserve(samples.size());
  for (const auto& s : samples) {
    const double r = out.log_ratio(s.x);
    if (!std::isfinite(r)) {
      out.reliable = false;
      return out;
    }
    magnitude.push_back(std::abs(r));
  }
  const auto q = static_cast<std::size_t>(options.quantile * static_cast<double>(magnitude.size() - 1));
  std::nth_element(magnitude.begin(), magnitude.begin() + static_cast<std::ptrdiff_t>(q), magnitude.end());
  out.reliable = magnitude[q] <= options.max_log_ratio;
  return out;
}

advantages::AdvantageTable proximal_targets(const advantages::AdvantageTable& table,
                                            const DensityRatioModel& ratio, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("proximal weight must be nonnegative");
  advantages::AdvantageTable out = table;
  if (lambda == 0.0) return out;
  for (auto& e : out.entries) e.estimate -= lambda * ratio.log_ratio(e.context);
  return out;
}

bool check_coverage_assumption(const DensityRatioModel& ratio, const std::vector<Context>& pi0_states,
                               double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("coverage epsilon must be positive");
  for (const Context& x : pi0_states) {
    if (!(ratio.log_ratio(x) <= epsilon)) return false;
  }
  return true;
}

std::vector<Context> resample_states(const Dataset& dataset, const Policy& pi, std::size_t count,
                                     std::uint64_t seed, double min_effective_size) {
  std::vector<const Context*> states;
  std::vector<double> weights;
  for (const Trajectory& traj : dataset.trajectories) {
    double w = 1.0;
    for (std::size_t t = 0; t < traj.size(); ++t) {
      states.push_back(&traj[t].context);
      weights.push_back(w);
      w *= pi.probability(traj[t].context, traj[t].action) / traj[t].propensity;
    }
  }
  double sum = 0.0, sq = 0.0;
  for (double w : weights) {
    sum += w;
    sq += w * w;
  }
  if (!(sum > 0.0) || sum * sum / sq < min_effective_size) return {};
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  Rng rng(derive_seed(seed, "state-resampling"));
  std::vector<Context> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(*states[pick(rng)]);
  return out;
}

}  // namespace shpi::improve
