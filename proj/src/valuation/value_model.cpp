#include "shpi/valuation/value_model.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

#include "shpi/core/dataset_io.hpp"
#include "shpi/core/rng.hpp"

namespace shpi::valuation {

namespace {

struct Transition {
  const Step* from;
  const Step* to;
};

std::vector<Transition> transitions(const Dataset& dataset) {
  std::vector<Transition> out;
  for (const Trajectory& traj : dataset.trajectories) {
    if (traj.size() < 2) throw std::invalid_argument("value fitting needs windows of at least 2 steps");
    for (std::size_t t = 0; t + 1 < traj.size(); ++t) out.push_back({&traj.steps[t], &traj.steps[t + 1]});
  }
  if (out.empty()) throw std::invalid_argument("empty dataset");
  return out;
}

Eigen::MatrixXd gather(const std::vector<Transition>& pairs, std::span<const std::size_t> index, bool next,
                       std::size_t dim) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(index.size()));
  for (std::size_t j = 0; j < index.size(); ++j) {
    const Step* s = next ? pairs[index[j]].to : pairs[index[j]].from;
    for (std::size_t i = 0; i < dim; ++i) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s->context.features[i];
    }
  }
  return x;
}

}  // namespace

ValueModel ValueModel::zero(std::size_t input_dim, double gamma) {
  ValueModel v;
  v.regressor = approx::Regressor::linear(input_dim, 1);
  v.gamma = gamma;
  return v;
}

void ValueModel::save(std::ostream& out) const {
  out << "shpi-value 1\ngamma " << format_double(gamma) << '\n';
  regressor.save(out);
}

void ValueModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  save(out);
}

ValueModel ValueModel::load(std::istream& in) {
  std::string magic, version, key, gamma;
  in >> magic >> version >> key >> gamma;
  if (magic != "shpi-value" || version != "1" || key != "gamma") {
    throw std::runtime_error("not a value model file");
  }
  ValueModel v;
  v.gamma = parse_double(gamma);
  v.regressor = approx::Regressor::load(in);
  if (v.regressor.output_dim() != 1) throw std::runtime_error("value model must have one output");
  return v;
}

ValueModel ValueModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return load(in);
}

ValueModel fit_value(const Dataset& dataset, approx::Regressor model, const ValueFitOptions& options) {
  if (model.output_dim() != 1) throw std::invalid_argument("value regressor must have one output");
  const std::vector<Transition> pairs = transitions(dataset);
  const double gamma = dataset.gamma;
  const std::size_t dim = model.input_dim();
  for (const Transition& p : pairs) {
    if (p.from->context.dim() != dim) throw std::invalid_argument("context dimension mismatch");
  }

  if (options.train.fit_input_transform) {
    std::vector<std::span<const double>> inputs;
    inputs.reserve(pairs.size());
    for (const Transition& p : pairs) inputs.push_back(p.from->context.view());
    approx::fit_input_transform(model, inputs);
  }

  // r' = (r - m) / s gives V = s V' + m / (1 - gamma). The network output is
  // further divided by 1 / (1 - gamma) so that it stays of order one.
  double mean = 0.0, scale = 1.0;
  if (options.normalize_rewards) {
    double sq = 0.0;
    for (const Transition& p : pairs) mean += p.from->reward;
    mean /= static_cast<double>(pairs.size());
    for (const Transition& p : pairs) sq += (p.from->reward - mean) * (p.from->reward - mean);
    const double sd = std::sqrt(sq / static_cast<double>(pairs.size()));
    if (gamma >= 1.0) mean = 0.0;
    scale = sd > 1e-12 ? sd : 1.0;
  }
  const double horizon_scale = gamma < 1.0 ? 1.0 / (1.0 - gamma) : 1.0;
  model.output_scale = scale * horizon_scale;
  model.output_shift = gamma < 1.0 ? mean / (1.0 - gamma) : 0.0;
  const double net_scale = model.output_scale;

  std::vector<double> rewards(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) rewards[i] = (pairs[i].from->reward - mean) / net_scale;

  const auto& train = options.train;
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = train.batch_size == 0 ? pairs.size() : std::min(train.batch_size, pairs.size());
  Rng rng(derive_seed(train.seed, "value-minibatch-order"));
  approx::Optimizer optimizer(train.method, train.learning_rate, model.parameter_count());
  std::vector<Eigen::MatrixXd> acts, next_acts;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.parameter_count()));
  std::vector<std::size_t> index;

  for (std::size_t epoch = 0; epoch < train.epochs; ++epoch) {
    if (train.batch_size != 0) {
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
    }
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      index.assign(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(stop));
      model.forward(gather(pairs, index, false, dim), acts);
      model.forward(gather(pairs, index, true, dim), next_acts);
      const double n = static_cast<double>(index.size());
      Eigen::MatrixXd delta(1, static_cast<Eigen::Index>(index.size()));
      for (std::size_t j = 0; j < index.size(); ++j) {
        const auto c = static_cast<Eigen::Index>(j);
        // The network-space output of a transform-free model equals V' scaled.
        const double residual = acts.back()(0, c) - rewards[index[j]] - gamma * next_acts.back()(0, c);
        delta(0, c) = 2.0 * residual / n;
      }
      grad.setZero();
      if (options.residual_gradient) model.backward(next_acts, -gamma * delta, grad);
      model.backward(acts, std::move(delta), grad);
      optimizer.step(model.parameters(), grad);
    }
    optimizer.set_learning_rate(optimizer.learning_rate() * train.learning_rate_decay);
  }

  ValueModel value;
  value.regressor = std::move(model);
  value.gamma = gamma;
  return value;
}

double bellman_residual(const Dataset& dataset, const ValueModel& value) {
  const std::vector<Transition> pairs = transitions(dataset);
  double total = 0.0;
  for (const Transition& p : pairs) {
    const double e = p.from->reward + dataset.gamma * value(p.to->context) - value(p.from->context);
    total += e * e;
  }
  return total / static_cast<double>(pairs.size());
}

double backshift_reward(const ValueModel& value, const Context& x, const Context& x_next, double gamma) {
  return value(x) - gamma * value(x_next);
}

Dataset apply_backshift(const Dataset& dataset, const ValueModel& value) {
  if (dataset.window_length < 2) throw std::invalid_argument("backshift needs windows of at least 2 steps");
  Dataset out;
  out.window_length = dataset.window_length - 1;
  out.window_step = dataset.window_step;
  out.gamma = dataset.gamma;
  out.action_count = dataset.action_count;
  out.trajectories.reserve(dataset.trajectories.size());
  for (const Trajectory& traj : dataset.trajectories) {
    Trajectory shifted;
    shifted.source_offset = traj.source_offset;
    shifted.stream_id = traj.stream_id;
    shifted.steps.assign(traj.steps.begin(), traj.steps.end() - 1);
    for (std::size_t t = 0; t < shifted.size(); ++t) {
      shifted.steps[t].reward = backshift_reward(value, traj[t].context, traj[t + 1].context, dataset.gamma);
    }
    out.trajectories.push_back(std::move(shifted));
  }
  return out;
}

ValueModel center_value(ValueModel value, const Dataset& dataset) {
  double total = 0.0;
  std::size_t count = 0;
  for (const Trajectory& traj : dataset.trajectories) {
    for (const Step& s : traj.steps) {
      total += value(s.context);
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("empty dataset");
  value.regressor.output_shift -= total / static_cast<double>(count);
  return value;
}

ValueModel value_from_table(const tabular::ValueTable& table, env::TabularEncoding encoding, double gamma) {
  const std::size_t dim = env::encoded_dim(encoding, table.n_states, table.horizon);
  ValueModel v = ValueModel::zero(dim, gamma);
  Eigen::VectorXd& params = v.regressor.parameters();
  // weights occupy the first dim entries (1 x dim), then the bias
  if (encoding == env::TabularEncoding::kState) {
    for (std::size_t s = 0; s < table.n_states; ++s) params[static_cast<Eigen::Index>(s)] = table(0, s);
  } else {
    for (std::size_t t = 0; t <= table.horizon; ++t) {
      for (std::size_t s = 0; s < table.n_states; ++s) {
        params[static_cast<Eigen::Index>(t * table.n_states + s)] = table(t, s);
      }
    }
  }
  return v;
}

}  // namespace shpi::valuation
