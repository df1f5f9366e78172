#include "shpi/env/submodular.hpp"

#include <cmath>
#include <stdexcept>

namespace shpi::env {

void ClickedMax::add(std::span<const double> embedding) {
  if (embedding.size() != max_.size()) throw std::invalid_argument("embedding dimension mismatch");
  for (std::size_t i = 0; i < max_.size(); ++i) max_[i] = std::max(max_[i], embedding[i]);
}

double ClickedMax::value(std::span<const double> omega) const {
  if (omega.size() != max_.size()) throw std::invalid_argument("affinity dimension mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < max_.size(); ++i) total += omega[i] * max_[i];
  return total;
}

void SubmodEnvConfig::validate() const {
  if (n_items == 0 || embed_dim == 0 || horizon == 0) {
    throw std::invalid_argument("submodular env needs positive item count, dimension and horizon");
  }
  if (!(temperature > 0.0)) throw std::invalid_argument("click temperature must be positive");
  if (!affinity.empty()) {
    if (affinity.size() != embed_dim) throw std::invalid_argument("affinity has wrong dimension");
    for (double w : affinity) {
      if (!(w >= 0.0)) throw std::invalid_argument("affinity entries must be nonnegative");
    }
  }
}

SubmodularEnv::SubmodularEnv(SubmodEnvConfig config)
    : config_(std::move(config)), clicked_(config_.embed_dim) {
  config_.validate();
  Rng rng(derive_seed(config_.seed, "submodular-items"));
  embeddings_.assign(config_.n_items, std::vector<double>(config_.embed_dim));
  for (auto& e : embeddings_) {
    for (double& v : e) v = standard_normal(rng);
  }
  if (config_.affinity.empty()) {
    config_.affinity.resize(config_.embed_dim);
    for (double& w : config_.affinity) w = uniform01(rng);
  }
  user_.assign(config_.embed_dim, 0.0);
  refresh_context();
}

void SubmodularEnv::refresh_context() {
  context_.features.resize(2 * config_.embed_dim);
  std::copy(user_.begin(), user_.end(), context_.features.begin());
  std::copy(clicked_.max().begin(), clicked_.max().end(),
            context_.features.begin() + static_cast<std::ptrdiff_t>(config_.embed_dim));
}

Context SubmodularEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  for (double& v : user_) v = standard_normal(rng_);
  clicked_ = ClickedMax(config_.embed_dim);
  time_ = 0;
  started_ = true;
  last_clicked_ = false;
  refresh_context();
  return context_;
}

double SubmodularEnv::click_probability(std::size_t item) const {
  const auto& e = embeddings_.at(item);
  double score = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) score += user_[i] * e[i];
  score /= config_.temperature * std::sqrt(static_cast<double>(config_.embed_dim));
  return 1.0 / (1.0 + std::exp(-(score + config_.click_offset)));
}

EnvStep SubmodularEnv::step(std::size_t action) {
  if (!started_) throw std::logic_error("submodular env stepped before reset");
  if (done()) throw std::logic_error("submodular env stepped after the episode ended");
  if (action >= config_.n_items) throw std::out_of_range("item index out of range");

  const double before = long_term_value();
  last_clicked_ = uniform01(rng_) < click_probability(action);
  if (last_clicked_) clicked_.add(embeddings_[action]);
  ++time_;
  refresh_context();
  return {context_, long_term_value() - before, done()};
}

}  // namespace shpi::env
