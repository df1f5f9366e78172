#include "shpi/env/synthetic.hpp"

#include <stdexcept>

namespace shpi::env {

double styblinski_tang(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("styblinski_tang of an empty vector");
  double total = 0.0;
  for (double v : x) {
    const double v2 = v * v;
    total += v2 * v2 - 16.0 * v2 + 5.0 * v;
  }
  return 0.5 * total;
}

void SynthEnvConfig::validate() const {
  if (dim == 0 || n_actions == 0 || horizon == 0) {
    throw std::invalid_argument("synthetic env needs positive dim, action count and horizon");
  }
  if (action_window == 0 || context_window == 0) {
    throw std::invalid_argument("averaging windows must be at least 1");
  }
}

SyntheticEnv::SyntheticEnv(SynthEnvConfig config) : config_(config) {
  config_.validate();
  Rng rng(derive_seed(config_.seed, "synthetic-action-vectors"));
  action_vectors_.assign(config_.n_actions, std::vector<double>(config_.dim));
  for (auto& v : action_vectors_) {
    for (double& x : v) x = config_.action_scale * standard_normal(rng);
  }
  if (config_.center_actions) {
    for (std::size_t j = 0; j < config_.dim; ++j) {
      double mean = 0.0;
      for (const auto& v : action_vectors_) mean += v[j];
      mean /= static_cast<double>(config_.n_actions);
      for (auto& v : action_vectors_) v[j] -= mean;
    }
  }
  context_.features.assign(config_.dim, 0.0);
}

void SyntheticEnv::set_action_vectors(std::vector<std::vector<double>> vectors) {
  if (vectors.size() != config_.n_actions) throw std::invalid_argument("wrong number of action vectors");
  for (const auto& v : vectors) {
    if (v.size() != config_.dim) throw std::invalid_argument("action vector has wrong dimension");
  }
  action_vectors_ = std::move(vectors);
}

Context SyntheticEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  std::vector<double> center(config_.dim, 0.0);
  center[uniform_index(rng_, config_.dim)] = -10.0;
  latent_.clear();
  actions_.clear();
  for (std::size_t i = 0; i < config_.action_window; ++i) {
    std::vector<double> w(config_.dim);
    for (std::size_t j = 0; j < config_.dim; ++j) w[j] = center[j] + standard_normal(rng_);
    latent_.push_back(std::move(w));
  }
  time_ = 0;
  started_ = true;
  refresh_context();
  return context_;
}

void SyntheticEnv::refresh_context() {
  const std::size_t n = std::min(config_.context_window, latent_.size());
  std::fill(context_.features.begin(), context_.features.end(), 0.0);
  for (std::size_t i = latent_.size() - n; i < latent_.size(); ++i) {
    for (std::size_t j = 0; j < config_.dim; ++j) context_.features[j] += latent_[i][j];
  }
  for (double& x : context_.features) x /= static_cast<double>(n);
}

EnvStep SyntheticEnv::step(std::size_t action) {
  if (!started_) throw std::logic_error("synthetic env stepped before reset");
  if (done()) throw std::logic_error("synthetic env stepped after the episode ended");
  if (action >= config_.n_actions) throw std::out_of_range("action out of range");

  actions_.push_back(action_vectors_[action]);
  while (actions_.size() > config_.action_window) actions_.pop_front();

  // W_{t+1} = (1/tau) sum_{i<tau} (W_{t-i} + a_{t-i}); missing early actions count as zero
  const std::size_t tau = config_.action_window;
  std::vector<double> next(config_.dim, 0.0);
  for (std::size_t i = 0; i < tau; ++i) {
    const auto& w = latent_[latent_.size() - 1 - i];
    for (std::size_t j = 0; j < config_.dim; ++j) next[j] += w[j];
  }
  for (const auto& a : actions_) {
    for (std::size_t j = 0; j < config_.dim; ++j) next[j] += a[j];
  }
  for (double& x : next) x /= static_cast<double>(tau);
  latent_.push_back(std::move(next));
  while (latent_.size() > std::max(config_.action_window, config_.context_window)) latent_.pop_front();

  refresh_context();
  ++time_;
  EnvStep out;
  out.next_context = context_;
  out.reward = -styblinski_tang(context_.features) / static_cast<double>(config_.dim);
  out.done = done();
  return out;
}

std::unique_ptr<Environment> SyntheticEnv::clone() const { return std::make_unique<SyntheticEnv>(*this); }

}  // namespace shpi::env
