#pragma once

#include <utility>

#include "shpi/core/policy.hpp"
#include "shpi/core/tabular.hpp"
#include "shpi/env/environment.hpp"

namespace shpi::env {

/// How a tabular state is exposed as a feature vector.
enum class TabularEncoding {
  kState,      ///< one-hot over S
  kTimeState,  ///< one-hot over (t, s), t = 0..T; lets a linear model hold V_t(s) exactly
};

std::size_t encoded_dim(TabularEncoding encoding, std::size_t n_states, std::size_t horizon);
Context encode_state(TabularEncoding encoding, std::size_t n_states, std::size_t horizon,
                     std::size_t t, std::size_t s);
/// Returns (t, s); t is 0 for kState.
std::pair<std::size_t, std::size_t> decode_state(TabularEncoding encoding, std::size_t n_states,
                                                 const Context& x);

/// Samples episodes of a TabularMDP.
class TabularEnv final : public Environment {
 public:
  TabularEnv(tabular::TabularMDP mdp, TabularEncoding encoding);

  Context reset(std::uint64_t seed) override;
  EnvStep step(std::size_t action) override;

  std::size_t action_count() const override { return mdp_.n_actions; }
  std::size_t context_dim() const override;
  std::size_t horizon() const override { return mdp_.horizon; }
  std::size_t time() const override { return time_; }
  const Context& context() const override { return context_; }

  std::unique_ptr<Environment> clone() const override { return std::make_unique<TabularEnv>(*this); }
  void reseed(std::uint64_t seed) override { rng_.seed(seed); }

  std::size_t state() const { return state_; }
  /// Places the episode at (t, s) without drawing randomness.
  void force(std::size_t t, std::size_t s);

  const tabular::TabularMDP& mdp() const { return mdp_; }
  TabularEncoding encoding() const { return encoding_; }

 private:
  std::size_t draw(const double* probs, std::size_t n);

  tabular::TabularMDP mdp_;
  TabularEncoding encoding_;
  std::size_t state_ = 0;
  std::size_t time_ = 0;
  bool started_ = false;
  Context context_;
  Rng rng_;
};

/// Adapts a TabularPolicy to encoded contexts.
class TabularContextPolicy final : public Policy {
 public:
  TabularContextPolicy(tabular::TabularPolicy policy, TabularEncoding encoding);

  std::size_t action_count() const override { return policy_.n_actions; }
  using Policy::probabilities;
  void probabilities(const Context& x, std::span<double> out) const override;

  const tabular::TabularPolicy& table() const { return policy_; }

 private:
  tabular::TabularPolicy policy_;
  TabularEncoding encoding_;
};

}  // namespace shpi::env
