#include "shpi/approx/training.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "shpi/core/rng.hpp"

namespace shpi::approx {

namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_samples(const Regressor& model, std::span<const Sample> samples) {
  if (samples.empty()) throw std::invalid_argument("empty sample set");
  for (const Sample& s : samples) {
    if (!(s.weight >= 0.0)) throw std::invalid_argument("sample weights must be nonnegative");
    if (s.head >= model.output_dim()) throw std::invalid_argument("sample head out of range");
    if (s.x.size() != model.input_dim()) throw std::invalid_argument("sample has wrong input dimension");
    if (!std::isfinite(s.target)) throw std::invalid_argument("non-finite regression target");
  }
}

Eigen::MatrixXd gather_inputs(std::span<const Sample> samples, std::span<const std::size_t> index,
                              std::size_t dim) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(index.size()));
  for (std::size_t j = 0; j < index.size(); ++j) {
    const auto& features = samples[index[j]].x;
    for (std::size_t i = 0; i < dim; ++i) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = features[i];
  }
  return x;
}

// Loss and gradient over a batch in network space. For the squared loss the
// targets are mapped through the inverse output transform by the caller.
double batch_loss_and_gradient(const Regressor& model, std::span<const Sample> samples,
                               std::span<const std::size_t> index, std::span<const double> targets,
                               Loss loss, std::vector<Eigen::MatrixXd>& acts, Eigen::VectorXd* grad) {
  const Eigen::MatrixXd inputs = gather_inputs(samples, index, model.input_dim());
  model.forward(inputs, acts);
  const Eigen::MatrixXd& out = acts.back();
  double weight_total = 0.0;
  for (std::size_t j = 0; j < index.size(); ++j) weight_total += samples[index[j]].weight;
  if (weight_total <= 0.0) return 0.0;

  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(out.rows(), out.cols());
  double total = 0.0;
  for (std::size_t j = 0; j < index.size(); ++j) {
    const Sample& s = samples[index[j]];
    const auto col = static_cast<Eigen::Index>(j);
    const auto head = static_cast<Eigen::Index>(s.head);
    const double z = out(head, col);
    if (loss == Loss::kSquared) {
      const double residual = z - targets[j];
      total += s.weight * residual * residual;
      delta(head, col) = 2.0 * s.weight * residual / weight_total;
    } else {
      total += s.weight * (softplus(z) - targets[j] * z);
      delta(head, col) = s.weight * (sigmoid(z) - targets[j]) / weight_total;
    }
  }
  if (grad != nullptr) model.backward(acts, std::move(delta), *grad);
  return total / weight_total;
}

FitResult fit(Regressor model, std::span<const Sample> samples, const TrainOptions& options) {
  check_samples(model, samples);
  if (options.epochs == 0) return {std::move(model), {}};

  if (options.fit_input_transform) {
    std::vector<std::span<const double>> inputs;
    inputs.reserve(samples.size());
    for (const Sample& s : samples) inputs.push_back(s.x);
    fit_input_transform(model, inputs);
  }
  if (options.loss == Loss::kSquared && options.fit_output_transform) {
    double wsum = 0.0, mean = 0.0;
    for (const Sample& s : samples) {
      wsum += s.weight;
      mean += s.weight * s.target;
    }
    mean = wsum > 0.0 ? mean / wsum : 0.0;
    double var = 0.0;
    for (const Sample& s : samples) var += s.weight * (s.target - mean) * (s.target - mean);
    var = wsum > 0.0 ? var / wsum : 0.0;
    const double sd = std::sqrt(var);
    model.output_shift = mean;
    model.output_scale = sd > 1e-12 * std::max(1.0, std::abs(mean)) ? sd : 1.0;
  }
  if (options.loss == Loss::kLogistic) {
    model.output_shift = 0.0;
    model.output_scale = 1.0;
  }

  std::vector<double> targets(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    targets[i] = options.loss == Loss::kSquared ? (samples[i].target - model.output_shift) / model.output_scale
                                                : samples[i].target;
  }

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = options.batch_size == 0 ? samples.size() : std::min(options.batch_size, samples.size());
  Rng rng(derive_seed(options.seed, "minibatch-order"));
  Optimizer optimizer(options.method, options.learning_rate, model.parameter_count());
  std::vector<Eigen::MatrixXd> acts;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.parameter_count()));
  std::vector<std::size_t> index;
  std::vector<double> batch_targets;

  FitResult result;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    if (options.batch_size != 0) {
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
    }
    double epoch_total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      index.assign(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(stop));
      batch_targets.resize(index.size());
      for (std::size_t j = 0; j < index.size(); ++j) batch_targets[j] = targets[index[j]];
      grad.setZero();
      epoch_total += batch_loss_and_gradient(model, samples, index, batch_targets, options.loss, acts, &grad);
      ++batches;
      optimizer.step(model.parameters(), grad);
    }
    result.epoch_loss.push_back(epoch_total / static_cast<double>(batches));
    optimizer.set_learning_rate(optimizer.learning_rate() * options.learning_rate_decay);
  }
  result.model = std::move(model);
  return result;
}

}  // namespace

Optimizer::Optimizer(Method method, double learning_rate, std::size_t parameter_count)
    : method_(method), learning_rate_(learning_rate) {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  m_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count));
  v_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count));
}

void Optimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++steps_;
  if (method_ == Method::kSgd) {
    params -= learning_rate_ * grad;
    return;
  }
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  params.array() -= learning_rate_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + epsilon_);
}

void fit_input_transform(Regressor& model, std::span<const std::span<const double>> inputs) {
  const auto dim = static_cast<Eigen::Index>(model.input_dim());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim), sq = Eigen::VectorXd::Zero(dim);
  if (inputs.empty()) return;
  for (const auto& x : inputs) {
    Eigen::Map<const Eigen::VectorXd> v(x.data(), dim);
    mean += v;
  }
  mean /= static_cast<double>(inputs.size());
  for (const auto& x : inputs) {
    Eigen::Map<const Eigen::VectorXd> v(x.data(), dim);
    sq += (v - mean).cwiseAbs2();
  }
  sq /= static_cast<double>(inputs.size());
  model.input_shift = mean;
  model.input_scale = sq.cwiseSqrt();
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (!(model.input_scale[i] > 1e-12)) model.input_scale[i] = 1.0;
  }
}

double evaluate_loss(const Regressor& model, std::span<const Sample> samples, Loss loss) {
  check_samples(model, samples);
  double total = 0.0, wsum = 0.0;
  for (const Sample& s : samples) {
    const double z = model.predict_head(s.x, s.head);
    if (loss == Loss::kSquared) {
      total += s.weight * (z - s.target) * (z - s.target);
    } else {
      // logit in network space
      const double logit = (z - model.output_shift) / model.output_scale;
      total += s.weight * (softplus(logit) - s.target * logit);
    }
    wsum += s.weight;
  }
  return wsum > 0.0 ? total / wsum : 0.0;
}

Eigen::VectorXd loss_gradient(const Regressor& model, std::span<const Sample> samples, Loss loss) {
  check_samples(model, samples);
  std::vector<std::size_t> index(samples.size());
  std::iota(index.begin(), index.end(), 0);
  std::vector<double> targets(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    targets[i] = loss == Loss::kSquared ? (samples[i].target - model.output_shift) / model.output_scale
                                        : samples[i].target;
  }
  std::vector<Eigen::MatrixXd> acts;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.parameter_count()));
  batch_loss_and_gradient(model, samples, index, targets, loss, acts, &grad);
  // network-space squared loss is the output-space loss divided by scale^2
  if (loss == Loss::kSquared) grad *= model.output_scale * model.output_scale;
  return grad;
}

FitResult fit_squared_loss(Regressor model, std::span<const Sample> samples, const TrainOptions& options) {
  TrainOptions opts = options;
  opts.loss = Loss::kSquared;
  return fit(std::move(model), samples, opts);
}

FitResult fit_logistic(Regressor model, std::span<const Sample> samples, TrainOptions options) {
  for (const Sample& s : samples) {
    if (s.target != 0.0 && s.target != 1.0) throw std::invalid_argument("logistic targets must be 0 or 1");
  }
  options.loss = Loss::kLogistic;
  options.fit_output_transform = false;
  return fit(std::move(model), samples, options);
}

}  // namespace shpi::approx
