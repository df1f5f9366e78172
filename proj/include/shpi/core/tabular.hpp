#pragma once

#include <cstddef>
#include <vector>

#include "shpi/core/rng.hpp"

namespace shpi::tabular {

/// Finite episodic MDP (S, A, P, R, p0, T, gamma) with dense storage.
struct TabularMDP {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> transition;  ///< P[s][a][s'], row-major
  std::vector<double> reward;      ///< R[s][a]
  std::vector<double> initial;     ///< p0[s]
  std::size_t horizon = 1;
  double gamma = 1.0;

  double p(std::size_t s, std::size_t a, std::size_t next) const {
    return transition[(s * n_actions + a) * n_states + next];
  }
  double r(std::size_t s, std::size_t a) const { return reward[s * n_actions + a]; }

  /// Throws std::invalid_argument when a distribution is off by more than 1e-12.
  void validate() const;
};

/// pi[s] (stationary) or pi[t][s] (one table per t < T).
struct TabularPolicy {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<std::vector<double>> tables;

  static TabularPolicy stationary(std::size_t n_states, std::size_t n_actions,
                                  std::vector<double> probs);
  static TabularPolicy uniform(std::size_t n_states, std::size_t n_actions);
  static TabularPolicy deterministic(std::size_t n_actions, const std::vector<std::size_t>& actions);

  bool time_indexed() const { return tables.size() > 1; }
  double prob(std::size_t t, std::size_t s, std::size_t a) const {
    const auto& table = tables.size() == 1 ? tables[0] : tables[t];
    return table[s * n_actions + a];
  }

  void validate(std::size_t horizon) const;
};

/// V[t][s] for t = 0..T; row T is identically zero.
struct ValueTable {
  std::size_t horizon = 0;
  std::size_t n_states = 0;
  std::vector<double> values;

  ValueTable() = default;
  ValueTable(std::size_t horizon, std::size_t n_states)
      : horizon(horizon), n_states(n_states), values((horizon + 1) * n_states, 0.0) {}

  double& operator()(std::size_t t, std::size_t s) { return values[t * n_states + s]; }
  double operator()(std::size_t t, std::size_t s) const { return values[t * n_states + s]; }
};

/// Q[t][s][a] for t = 0..T-1.
struct ActionValueTable {
  std::size_t horizon = 0;
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> values;

  ActionValueTable() = default;
  ActionValueTable(std::size_t horizon, std::size_t n_states, std::size_t n_actions)
      : horizon(horizon), n_states(n_states), n_actions(n_actions),
        values(horizon * n_states * n_actions, 0.0) {}

  double& operator()(std::size_t t, std::size_t s, std::size_t a) {
    return values[(t * n_states + s) * n_actions + a];
  }
  double operator()(std::size_t t, std::size_t s, std::size_t a) const {
    return values[(t * n_states + s) * n_actions + a];
  }
};

ValueTable dp_value(const TabularMDP& mdp, const TabularPolicy& policy);
ActionValueTable dp_q(const TabularMDP& mdp, const TabularPolicy& policy);

/// Expected k-step lookahead after (s, a) at time t, rolling in with `pi` for
/// k-1 steps and crediting gamma^k * bonus(t+k, x_{t+k}). Rewards and bonus are
/// zero from the horizon on. With include_rewards=false only the discounted
/// bonus term is propagated.
ActionValueTable k_step_lookahead(const TabularMDP& mdp, const TabularPolicy& pi,
                                  const ValueTable& bonus, std::size_t k,
                                  bool include_rewards = true);

/// Exact k-step advantage: k_step_lookahead(pi, V^mu) - V^mu_t(s).
ActionValueTable dp_k_advantage(const TabularMDP& mdp, const TabularPolicy& mu,
                                const TabularPolicy& pi, std::size_t k);

/// Same estimand with an arbitrary bonus/baseline table in place of V^mu.
ActionValueTable k_advantage_with_value(const TabularMDP& mdp, const TabularPolicy& pi,
                                        const ValueTable& value, std::size_t k);

/// d_t(s) for t = 0..T-1 when rolling in with `policy` from p0.
std::vector<std::vector<double>> state_distributions(const TabularMDP& mdp,
                                                     const TabularPolicy& policy);

/// Both sides of the k-step performance difference identity.
struct PdlTerms {
  /// gamma * sum_{t>=1} E_{d^mu_t}[V^pi_t - V^mu_t]. The factor gamma comes from
  /// E_mu[Q^pi_t] - V^mu_t = gamma E[V^pi_{t+1} - V^mu_{t+1}]; it is 1 in the
  /// undiscounted case.
  double lhs = 0.0;
  double advantage = 0.0;   ///< sum_t E_{d^mu_t, mu}[A^pi_(k),t]
  double correction = 0.0;  ///< sum_t gamma^k E_{d^mu_t, mu} E_pi[V^pi_{t+k} - V^mu_{t+k}]
};

PdlTerms pdl_terms(const TabularMDP& mdp, const TabularPolicy& mu, const TabularPolicy& pi,
                   std::size_t k);
/// |lhs - advantage - correction|.
double pdl_residual(const TabularMDP& mdp, const TabularPolicy& mu, const TabularPolicy& pi,
                    std::size_t k);

TabularMDP random_mdp(std::size_t n_states, std::size_t n_actions, std::size_t horizon,
                      double gamma, Rng& rng);
TabularPolicy random_policy(std::size_t n_states, std::size_t n_actions, Rng& rng,
                            std::size_t time_tables = 1);
TabularPolicy random_deterministic_policy(std::size_t n_states, std::size_t n_actions, Rng& rng);

}  // namespace shpi::tabular
