#include "shpi/env/tabular_env.hpp"

#include <stdexcept>

namespace shpi::env {

std::size_t encoded_dim(TabularEncoding encoding, std::size_t n_states, std::size_t horizon) {
  return encoding == TabularEncoding::kState ? n_states : (horizon + 1) * n_states;
}

Context encode_state(TabularEncoding encoding, std::size_t n_states, std::size_t horizon,
                     std::size_t t, std::size_t s) {
  Context x;
  x.features.assign(encoded_dim(encoding, n_states, horizon), 0.0);
  const std::size_t index = encoding == TabularEncoding::kState ? s : t * n_states + s;
  x.features.at(index) = 1.0;
  return x;
}

std::pair<std::size_t, std::size_t> decode_state(TabularEncoding encoding, std::size_t n_states,
                                                 const Context& x) {
  for (std::size_t i = 0; i < x.features.size(); ++i) {
    if (x.features[i] == 1.0) {
      if (encoding == TabularEncoding::kState) return {0, i};
      return {i / n_states, i % n_states};
    }
  }
  throw std::invalid_argument("context is not a one-hot tabular encoding");
}

TabularEnv::TabularEnv(tabular::TabularMDP mdp, TabularEncoding encoding)
    : mdp_(std::move(mdp)), encoding_(encoding) {
  mdp_.validate();
  context_ = encode_state(encoding_, mdp_.n_states, mdp_.horizon, 0, 0);
}

std::size_t TabularEnv::context_dim() const {
  return encoded_dim(encoding_, mdp_.n_states, mdp_.horizon);
}

std::size_t TabularEnv::draw(const double* probs, std::size_t n) {
  const double u = uniform01(rng_);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cumulative += probs[i];
    if (u < cumulative) return i;
  }
  for (std::size_t i = n; i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  return n - 1;
}

Context TabularEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  state_ = draw(mdp_.initial.data(), mdp_.n_states);
  time_ = 0;
  started_ = true;
  context_ = encode_state(encoding_, mdp_.n_states, mdp_.horizon, time_, state_);
  return context_;
}

void TabularEnv::force(std::size_t t, std::size_t s) {
  if (t > mdp_.horizon || s >= mdp_.n_states) throw std::out_of_range("forced state out of range");
  time_ = t;
  state_ = s;
  started_ = true;
  context_ = encode_state(encoding_, mdp_.n_states, mdp_.horizon, time_, state_);
}

EnvStep TabularEnv::step(std::size_t action) {
  if (!started_) throw std::logic_error("tabular env stepped before reset");
  if (done()) throw std::logic_error("tabular env stepped after the episode ended");
  if (action >= mdp_.n_actions) throw std::out_of_range("action out of range");
  const double reward = mdp_.r(state_, action);
  state_ = draw(&mdp_.transition[(state_ * mdp_.n_actions + action) * mdp_.n_states], mdp_.n_states);
  ++time_;
  context_ = encode_state(encoding_, mdp_.n_states, mdp_.horizon, time_, state_);
  return {context_, reward, done()};
}

TabularContextPolicy::TabularContextPolicy(tabular::TabularPolicy policy, TabularEncoding encoding)
    : policy_(std::move(policy)), encoding_(encoding) {
  if (policy_.time_indexed() && encoding_ == TabularEncoding::kState) {
    throw std::invalid_argument("time-indexed policies need the time-state encoding");
  }
}

void TabularContextPolicy::probabilities(const Context& x, std::span<double> out) const {
  auto [t, s] = decode_state(encoding_, policy_.n_states, x);
  if (policy_.time_indexed() && t >= policy_.tables.size()) t = policy_.tables.size() - 1;
  for (std::size_t a = 0; a < policy_.n_actions; ++a) out[a] = policy_.prob(t, s, a);
}

}  // namespace shpi::env
