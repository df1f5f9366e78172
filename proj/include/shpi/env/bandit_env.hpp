#pragma once

#include <vector>

#include "shpi/core/rng.hpp"
#include "shpi/env/environment.hpp"

namespace shpi::env {

/// Contextual bandit with one-hot contexts drawn uniformly and independently of
/// the actions; reward(c, a) = mean[c][a] + noise_std * N(0,1).
struct BanditConfig {
  std::vector<std::vector<double>> means;  ///< [context][action]
  double noise_std = 0.0;
  std::size_t horizon = 1;
};

class ContextualBanditEnv final : public Environment {
 public:
  explicit ContextualBanditEnv(BanditConfig config);

  Context reset(std::uint64_t seed) override;
  EnvStep step(std::size_t action) override;

  std::size_t action_count() const override { return config_.means.front().size(); }
  std::size_t context_dim() const override { return config_.means.size(); }
  std::size_t horizon() const override { return config_.horizon; }
  std::size_t time() const override { return time_; }
  const Context& context() const override { return context_; }

  std::unique_ptr<Environment> clone() const override {
    return std::make_unique<ContextualBanditEnv>(*this);
  }
  void reseed(std::uint64_t seed) override { rng_.seed(seed); }

  std::size_t current() const { return current_; }

 private:
  void draw_context();

  BanditConfig config_;
  std::size_t current_ = 0;
  std::size_t time_ = 0;
  bool started_ = false;
  Context context_;
  Rng rng_;
};

}  // namespace shpi::env
