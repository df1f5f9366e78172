#pragma once

#include <cstdint>
#include <vector>

#include "shpi/advantages/advantages.hpp"
#include "shpi/approx/regressor.hpp"
#include "shpi/approx/training.hpp"

namespace shpi::improve {

/// log(d^pi(x) / d^mu(x)) from a logistic classifier trained to tell
/// pi-states (label 1) from mu-states (label 0).
struct DensityRatioModel {
  approx::Regressor classifier = approx::Regressor::linear(1, 1);
  /// log(n_pi / n_mu); the classifier's logit carries this prior.
  double log_prior_ratio = 0.0;
  /// False when the estimated ratios are too large to trust.
  bool reliable = true;

  double log_ratio(std::span<const double> x) const;
  double log_ratio(const Context& x) const { return log_ratio(x.view()); }
};

struct DensityRatioOptions {
  std::vector<std::size_t> hidden{32, 32};  ///< empty = logistic regression
  approx::TrainOptions train{approx::Method::kAdam, 1e-2, 200, 256, 0, approx::Loss::kLogistic, true, false, 1.0};
  /// A model is flagged unreliable when this quantile of |log-ratio| over the
  /// training states exceeds max_log_ratio.
  double quantile = 0.99;
  double max_log_ratio = 4.605170185988092;  // log(100)
};

/// Throws std::invalid_argument when either sample is empty.
DensityRatioModel fit_density_ratio(const std::vector<Context>& mu_states, const std::vector<Context>& pi_states,
                                    std::uint64_t seed, const DensityRatioOptions& options = {});

/// estimate - lambda * log_ratio(x) entrywise; lambda == 0 returns the table
/// unchanged.
advantages::AdvantageTable proximal_targets(const advantages::AdvantageTable& table,
                                            const DensityRatioModel& ratio, double lambda);

/// True iff max over pi0_states of the estimated log-ratio is <= epsilon.
bool check_coverage_assumption(const DensityRatioModel& ratio, const std::vector<Context>& pi0_states,
                               double epsilon);

/// Model-free pi-state sample: resamples the dataset's contexts with
/// probability proportional to the unclipped weight of the actions leading to
/// them within their window. Returns an empty vector when the effective sample
/// size falls below `min_effective_size`.
std::vector<Context> resample_states(const Dataset& dataset, const Policy& pi, std::size_t count,
                                     std::uint64_t seed, double min_effective_size);

}  // namespace shpi::improve
