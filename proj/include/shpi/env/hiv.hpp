#pragma once

#include <array>

#include "shpi/core/rng.hpp"
#include "shpi/env/environment.hpp"

namespace shpi::env {

/// (T1, T2, T1*, T2*, V, E): healthy and infected type-1/type-2 cells, free
/// virus and immune effectors.
using HivState = std::array<double, 6>;

/// Constants of the two-drug HIV infection model (Adams et al. 2004 values,
/// as used by Ernst et al. 2006).
struct HivParameters {
  double lambda1 = 1e4, d1 = 0.01, k1 = 8e-7;
  double lambda2 = 31.98, d2 = 0.01, f = 0.34, k2 = 1e-4;
  double delta = 0.7, m1 = 1e-5, m2 = 1e-5;
  double n_t = 100.0, c = 13.0, rho1 = 1.0, rho2 = 1.0;
  double lambda_e = 1.0, b_e = 0.3, k_b = 100.0, d_e = 0.25, k_d = 500.0, delta_e = 0.1;
  // reward weights
  double q_virus = 0.1, r1 = 2e4, r2 = 2e3, s_immune = 1e3;
  // drug efficacies when switched on
  double rti_efficacy = 0.7, pi_efficacy = 0.3;
};

struct HivEnvConfig {
  HivParameters params;
  double decision_days = 5.0;
  std::size_t substeps = 1000;  ///< RK4 steps per decision
  std::size_t horizon = 200;
  /// Multiplicative log-normal perturbation of the initial state (0 = exact).
  double initial_noise = 0.0;
};

/// The unhealthy steady state the episodes start from.
HivState hiv_initial_state();

/// Time derivative of the state under drug efficacies (eps1, eps2).
HivState hiv_derivative(const HivState& x, double eps1, double eps2, const HivParameters& p);

/// -(q V + r1 eps1^2 + r2 eps2^2 - s E).
double hiv_reward(const HivState& x, double eps1, double eps2, const HivParameters& p);

struct HivTransition {
  HivState state;
  double reward = 0.0;
};

/// Integrates one decision interval with fixed-step RK4; action bit 0 switches
/// the first drug on, bit 1 the second. Components are clamped at zero.
HivTransition hiv_step(const HivState& state, std::size_t action, const HivEnvConfig& config);

class HivEnv final : public Environment {
 public:
  explicit HivEnv(HivEnvConfig config = {});

  Context reset(std::uint64_t seed) override;
  EnvStep step(std::size_t action) override;

  std::size_t action_count() const override { return 4; }
  std::size_t context_dim() const override { return 6; }
  std::size_t horizon() const override { return config_.horizon; }
  std::size_t time() const override { return time_; }
  const Context& context() const override { return context_; }

  std::unique_ptr<Environment> clone() const override { return std::make_unique<HivEnv>(*this); }
  void reseed(std::uint64_t seed) override { rng_.seed(seed); }
  double reward_scale() const override { return 1e6; }

  const HivState& state() const { return state_; }
  void set_state(const HivState& state);

  /// Context encoding: log10(1 + x) per component.
  static Context encode(const HivState& state);

 private:
  HivEnvConfig config_;
  HivState state_{};
  Context context_;
  std::size_t time_ = 0;
  bool started_ = false;
  Rng rng_;
};

}  // namespace shpi::env
