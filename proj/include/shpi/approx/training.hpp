#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "shpi/approx/regressor.hpp"

namespace shpi::approx {

/// One regression example. `x` is borrowed: the referenced features must
/// outlive every call that receives the sample.
struct Sample {
  std::span<const double> x;
  double target = 0.0;
  double weight = 1.0;
  std::size_t head = 0;
};

enum class Loss { kSquared, kLogistic };
enum class Method { kSgd, kAdam };

/// First-order optimizer state; moment vectors match the parameter shape.
class Optimizer {
 public:
  Optimizer(Method method, double learning_rate, std::size_t parameter_count);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

  Method method() const { return method_; }
  double learning_rate() const { return learning_rate_; }
  void set_learning_rate(double lr) { learning_rate_ = lr; }
  std::size_t steps() const { return steps_; }
  const Eigen::VectorXd& first_moment() const { return m_; }
  const Eigen::VectorXd& second_moment() const { return v_; }

 private:
  Method method_;
  double learning_rate_;
  double beta1_ = 0.9, beta2_ = 0.999, epsilon_ = 1e-8;
  Eigen::VectorXd m_, v_;
  std::size_t steps_ = 0;
};

struct TrainOptions {
  Method method = Method::kAdam;
  double learning_rate = 1e-3;
  std::size_t epochs = 10;
  std::size_t batch_size = 64;  ///< 0 = full batch, no shuffling
  std::uint64_t seed = 0;
  Loss loss = Loss::kSquared;
  /// Refit the input standardization to the samples before training.
  bool fit_input_transform = true;
  /// Refit output shift/scale to the targets (squared loss only).
  bool fit_output_transform = true;
  /// Multiplies the learning rate after each epoch.
  double learning_rate_decay = 1.0;
};

struct FitResult {
  Regressor model;
  /// Mean minibatch loss per epoch, in network (standardized-target) units.
  std::vector<double> epoch_loss;
};

/// Weighted mean loss over samples, in the model's output units.
double evaluate_loss(const Regressor& model, std::span<const Sample> samples, Loss loss = Loss::kSquared);

/// Analytic gradient of evaluate_loss with respect to the parameters.
Eigen::VectorXd loss_gradient(const Regressor& model, std::span<const Sample> samples,
                              Loss loss = Loss::kSquared);

/// Minimizes sum_i w_i (f_{head_i}(x_i) - y_i)^2 / sum_i w_i by minibatch
/// gradient steps. Throws std::invalid_argument on an empty sample set or a
/// negative weight. Minibatch order depends on options.seed only.
FitResult fit_squared_loss(Regressor model, std::span<const Sample> samples, const TrainOptions& options);

/// Logistic regression on {0,1} targets: the head output is the logit.
FitResult fit_logistic(Regressor model, std::span<const Sample> samples, TrainOptions options);

/// Sets input_shift/input_scale to the feature means and standard deviations
/// (scale 1 for constant features).
void fit_input_transform(Regressor& model, std::span<const std::span<const double>> inputs);

}  // namespace shpi::approx
