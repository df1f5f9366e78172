#pragma once

#include <deque>
#include <span>
#include <vector>

#include "shpi/core/rng.hpp"
#include "shpi/env/environment.hpp"

namespace shpi::env {

/// f(x) = 1/2 sum_i (x_i^4 - 16 x_i^2 + 5 x_i). Throws on empty input.
double styblinski_tang(std::span<const double> x);

struct SynthEnvConfig {
  std::size_t dim = 2;
  std::size_t n_actions = 10;
  std::size_t action_window = 5;    ///< tau
  std::size_t context_window = 30;  ///< rho
  std::size_t horizon = 150;
  double action_scale = 0.1;
  /// Subtract the mean action vector so that uniform play has no drift.
  bool center_actions = true;
  std::uint64_t seed = 0;  ///< action vectors only

  void validate() const;
};

/// Toy recommendation task: each action adds a fixed random vector to a latent
/// user state W, which is smoothed over `action_window` steps; the observed
/// context X averages the last `context_window` latent states. The reward is
/// -styblinski_tang(X_{t+1}) / d.
class SyntheticEnv final : public Environment {
 public:
  explicit SyntheticEnv(SynthEnvConfig config);

  Context reset(std::uint64_t seed) override;
  EnvStep step(std::size_t action) override;

  std::size_t action_count() const override { return config_.n_actions; }
  std::size_t context_dim() const override { return config_.dim; }
  std::size_t horizon() const override { return config_.horizon; }
  std::size_t time() const override { return time_; }
  const Context& context() const override { return context_; }

  std::unique_ptr<Environment> clone() const override;
  void reseed(std::uint64_t seed) override { rng_.seed(seed); }
  double reward_scale() const override { return 100.0; }

  const SynthEnvConfig& config() const { return config_; }
  const std::vector<double>& action_vector(std::size_t a) const { return action_vectors_.at(a); }
  /// Overrides the drawn action vectors (tests and ablations).
  void set_action_vectors(std::vector<std::vector<double>> vectors);
  const std::vector<double>& latent() const { return latent_.back(); }

 private:
  void refresh_context();

  SynthEnvConfig config_;
  std::vector<std::vector<double>> action_vectors_;
  std::deque<std::vector<double>> latent_;   ///< W history, newest last
  std::deque<std::vector<double>> actions_;  ///< applied action vectors, newest last
  Context context_;
  std::size_t time_ = 0;
  bool started_ = false;
  Rng rng_;
};

}  // namespace shpi::env
