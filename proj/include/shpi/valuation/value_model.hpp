#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>

#include "shpi/approx/regressor.hpp"
#include "shpi/approx/training.hpp"
#include "shpi/core/tabular.hpp"
#include "shpi/core/types.hpp"
#include "shpi/env/tabular_env.hpp"

namespace shpi::valuation {

/// Scalar state-value model V(x), the termination bonus.
struct ValueModel {
  approx::Regressor regressor = approx::Regressor::linear(1, 1);
  double gamma = 0.99;

  /// V == 0 everywhere (session-RL bonus).
  static ValueModel zero(std::size_t input_dim, double gamma);

  double operator()(std::span<const double> x) const { return regressor.predict_head(x, 0); }
  double operator()(const Context& x) const { return (*this)(x.view()); }

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static ValueModel load(std::istream& in);
  static ValueModel load(const std::filesystem::path& path);

  bool operator==(const ValueModel&) const = default;
};

struct ValueFitOptions {
  approx::TrainOptions train{};
  /// Differentiate through the bootstrap target as well.
  bool residual_gradient = false;
  /// Standardize rewards before fitting; the output transform undoes it.
  bool normalize_rewards = true;
};

/// Minimizes sum (r_t + gamma V(x_{t+1}) - V(x_t))^2 over consecutive pairs
/// inside each window, by minibatch gradient steps. The target is held fixed
/// within each update unless options.residual_gradient is set. The last step
/// of every window has no successor and is skipped. Throws
/// std::invalid_argument when a window is shorter than 2 steps.
ValueModel fit_value(const Dataset& dataset, approx::Regressor model_init,
                     const ValueFitOptions& options);

/// Squared Bellman residual averaged over the pairs fit_value uses.
double bellman_residual(const Dataset& dataset, const ValueModel& value);

/// r_hat = V(x) - gamma V(x').
double backshift_reward(const ValueModel& value, const Context& x, const Context& x_next, double gamma);

/// Replaces every reward by its backshift estimate. Windows lose their last
/// step, which has no successor, so the window length becomes W - 1.
Dataset apply_backshift(const Dataset& dataset, const ValueModel& value);

/// Subtracts the model's mean prediction over the dataset's contexts.
ValueModel center_value(ValueModel value, const Dataset& dataset);

/// Linear model on one-hot encodings that reproduces `table` exactly; with the
/// kState encoding row t = 0 is used.
ValueModel value_from_table(const tabular::ValueTable& table, env::TabularEncoding encoding,
                            double gamma);

}  // namespace shpi::valuation
