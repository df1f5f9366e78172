#include "shpi/env/bandit_env.hpp"

#include <stdexcept>

namespace shpi::env {

ContextualBanditEnv::ContextualBanditEnv(BanditConfig config) : config_(std::move(config)) {
  if (config_.means.empty() || config_.means.front().empty() || config_.horizon == 0) {
    throw std::invalid_argument("bandit needs contexts, actions and a positive horizon");
  }
  for (const auto& row : config_.means) {
    if (row.size() != config_.means.front().size()) throw std::invalid_argument("ragged bandit means");
  }
  context_.features.assign(config_.means.size(), 0.0);
  context_.features[0] = 1.0;
}

void ContextualBanditEnv::draw_context() {
  current_ = uniform_index(rng_, config_.means.size());
  std::fill(context_.features.begin(), context_.features.end(), 0.0);
  context_.features[current_] = 1.0;
}

Context ContextualBanditEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  time_ = 0;
  started_ = true;
  draw_context();
  return context_;
}

EnvStep ContextualBanditEnv::step(std::size_t action) {
  if (!started_) throw std::logic_error("bandit stepped before reset");
  if (done()) throw std::logic_error("bandit stepped after the episode ended");
  if (action >= action_count()) throw std::out_of_range("action out of range");
  double reward = config_.means[current_][action];
  if (config_.noise_std > 0.0) reward += config_.noise_std * standard_normal(rng_);
  ++time_;
  draw_context();
  return {context_, reward, done()};
}

}  // namespace shpi::env
