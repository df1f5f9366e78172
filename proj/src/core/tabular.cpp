#include "shpi/core/tabular.hpp"

#include <cmath>
#include <stdexcept>

namespace shpi::tabular {

namespace {

constexpr double kSumTolerance = 1e-12;

void check_distribution(const double* p, std::size_t n, const char* what) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(p[i] >= 0.0)) throw std::invalid_argument(std::string(what) + " has a negative entry");
    total += p[i];
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw std::invalid_argument(std::string(what) + " does not sum to 1");
  }
}

void check_compatible(const TabularMDP& mdp, const TabularPolicy& policy) {
  if (policy.n_states != mdp.n_states || policy.n_actions != mdp.n_actions) {
    throw std::invalid_argument("policy and MDP dimensions differ");
  }
  policy.validate(mdp.horizon);
}

std::vector<double> random_simplex(std::size_t n, Rng& rng) {
  std::vector<double> p(n);
  double total = 0.0;
  for (double& v : p) {
    v = -std::log(1.0 - uniform01(rng));  // Dirichlet(1,...,1)
    total += v;
  }
  for (double& v : p) v /= total;
  // push rounding into the largest entry so the row sums to 1 within 1e-12
  double sum = 0.0;
  std::size_t largest = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += p[i];
    if (p[i] > p[largest]) largest = i;
  }
  p[largest] += 1.0 - sum;
  return p;
}

}  // namespace

void TabularMDP::validate() const {
  if (n_states == 0 || n_actions == 0) throw std::invalid_argument("empty state or action space");
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0,1]");
  if (transition.size() != n_states * n_actions * n_states || reward.size() != n_states * n_actions ||
      initial.size() != n_states) {
    throw std::invalid_argument("MDP tensor sizes do not match dimensions");
  }
  for (std::size_t sa = 0; sa < n_states * n_actions; ++sa) {
    check_distribution(&transition[sa * n_states], n_states, "transition row");
  }
  check_distribution(initial.data(), n_states, "initial distribution");
}

TabularPolicy TabularPolicy::stationary(std::size_t n_states, std::size_t n_actions,
                                        std::vector<double> probs) {
  TabularPolicy policy{n_states, n_actions, {std::move(probs)}};
  policy.validate(1);
  return policy;
}

TabularPolicy TabularPolicy::uniform(std::size_t n_states, std::size_t n_actions) {
  return stationary(n_states, n_actions,
                    std::vector<double>(n_states * n_actions, 1.0 / static_cast<double>(n_actions)));
}

TabularPolicy TabularPolicy::deterministic(std::size_t n_actions,
                                           const std::vector<std::size_t>& actions) {
  std::vector<double> probs(actions.size() * n_actions, 0.0);
  for (std::size_t s = 0; s < actions.size(); ++s) {
    if (actions[s] >= n_actions) throw std::invalid_argument("action out of range");
    probs[s * n_actions + actions[s]] = 1.0;
  }
  return stationary(actions.size(), n_actions, std::move(probs));
}

void TabularPolicy::validate(std::size_t horizon) const {
  if (tables.empty()) throw std::invalid_argument("policy has no tables");
  if (tables.size() != 1 && tables.size() < horizon) {
    throw std::invalid_argument("time-indexed policy needs one table per step");
  }
  for (const auto& table : tables) {
    if (table.size() != n_states * n_actions) throw std::invalid_argument("policy table size mismatch");
    for (std::size_t s = 0; s < n_states; ++s) {
      check_distribution(&table[s * n_actions], n_actions, "policy row");
    }
  }
}

ValueTable dp_value(const TabularMDP& mdp, const TabularPolicy& policy) {
  check_compatible(mdp, policy);
  const std::size_t S = mdp.n_states, A = mdp.n_actions, T = mdp.horizon;
  ValueTable v(T, S);
  for (std::size_t t = T; t-- > 0;) {
    for (std::size_t s = 0; s < S; ++s) {
      double total = 0.0;
      for (std::size_t a = 0; a < A; ++a) {
        const double pa = policy.prob(t, s, a);
        if (pa == 0.0) continue;
        double next = 0.0;
        for (std::size_t s2 = 0; s2 < S; ++s2) next += mdp.p(s, a, s2) * v(t + 1, s2);
        total += pa * (mdp.r(s, a) + mdp.gamma * next);
      }
      v(t, s) = total;
    }
  }
  return v;
}

ActionValueTable dp_q(const TabularMDP& mdp, const TabularPolicy& policy) {
  const ValueTable v = dp_value(mdp, policy);
  const std::size_t S = mdp.n_states, A = mdp.n_actions, T = mdp.horizon;
  ActionValueTable q(T, S, A);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) {
        double next = 0.0;
        for (std::size_t s2 = 0; s2 < S; ++s2) next += mdp.p(s, a, s2) * v(t + 1, s2);
        q(t, s, a) = mdp.r(s, a) + mdp.gamma * next;
      }
    }
  }
  return q;
}

ActionValueTable k_step_lookahead(const TabularMDP& mdp, const TabularPolicy& pi,
                                  const ValueTable& bonus, std::size_t k, bool include_rewards) {
  check_compatible(mdp, pi);
  const std::size_t S = mdp.n_states, A = mdp.n_actions, T = mdp.horizon;
  if (k < 1 || k > T) throw std::invalid_argument("k must lie in [1, T]");
  if (bonus.horizon != T || bonus.n_states != S) throw std::invalid_argument("bonus table shape mismatch");

  ActionValueTable out(T, S, A);
  std::vector<double> ahead(S), scratch(S);
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t end = std::min(t + k, T);
    for (std::size_t s = 0; s < S; ++s) ahead[s] = (t + k <= T) ? bonus(t + k, s) : 0.0;
    // roll back from the truncation point to t+1 under pi
    for (std::size_t tau = end; tau-- > t + 1;) {
      for (std::size_t s = 0; s < S; ++s) {
        double total = 0.0;
        for (std::size_t a = 0; a < A; ++a) {
          const double pa = pi.prob(tau, s, a);
          if (pa == 0.0) continue;
          double next = 0.0;
          for (std::size_t s2 = 0; s2 < S; ++s2) next += mdp.p(s, a, s2) * ahead[s2];
          total += pa * ((include_rewards ? mdp.r(s, a) : 0.0) + mdp.gamma * next);
        }
        scratch[s] = total;
      }
      ahead.swap(scratch);
    }
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) {
        double next = 0.0;
        for (std::size_t s2 = 0; s2 < S; ++s2) next += mdp.p(s, a, s2) * ahead[s2];
        out(t, s, a) = (include_rewards ? mdp.r(s, a) : 0.0) + mdp.gamma * next;
      }
    }
  }
  return out;
}

ActionValueTable k_advantage_with_value(const TabularMDP& mdp, const TabularPolicy& pi,
                                        const ValueTable& value, std::size_t k) {
  ActionValueTable adv = k_step_lookahead(mdp, pi, value, k);
  for (std::size_t t = 0; t < adv.horizon; ++t) {
    for (std::size_t s = 0; s < adv.n_states; ++s) {
      for (std::size_t a = 0; a < adv.n_actions; ++a) adv(t, s, a) -= value(t, s);
    }
  }
  return adv;
}

ActionValueTable dp_k_advantage(const TabularMDP& mdp, const TabularPolicy& mu,
                                const TabularPolicy& pi, std::size_t k) {
  if (k < 1 || k > mdp.horizon) throw std::invalid_argument("k must lie in [1, T]");
  return k_advantage_with_value(mdp, pi, dp_value(mdp, mu), k);
}

std::vector<std::vector<double>> state_distributions(const TabularMDP& mdp,
                                                     const TabularPolicy& policy) {
  check_compatible(mdp, policy);
  const std::size_t S = mdp.n_states, A = mdp.n_actions, T = mdp.horizon;
  std::vector<std::vector<double>> d(T, std::vector<double>(S, 0.0));
  d[0] = mdp.initial;
  for (std::size_t t = 0; t + 1 < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      if (d[t][s] == 0.0) continue;
      for (std::size_t a = 0; a < A; ++a) {
        const double mass = d[t][s] * policy.prob(t, s, a);
        if (mass == 0.0) continue;
        for (std::size_t s2 = 0; s2 < S; ++s2) d[t + 1][s2] += mass * mdp.p(s, a, s2);
      }
    }
  }
  return d;
}

PdlTerms pdl_terms(const TabularMDP& mdp, const TabularPolicy& mu, const TabularPolicy& pi,
                   std::size_t k) {
  if (k < 1 || k > mdp.horizon) throw std::invalid_argument("k must lie in [1, T]");
  const std::size_t S = mdp.n_states, A = mdp.n_actions, T = mdp.horizon;
  const ValueTable v_mu = dp_value(mdp, mu);
  const ValueTable v_pi = dp_value(mdp, pi);
  const auto d_mu = state_distributions(mdp, mu);

  ValueTable gap(T, S);
  for (std::size_t i = 0; i < gap.values.size(); ++i) gap.values[i] = v_pi.values[i] - v_mu.values[i];

  const ActionValueTable adv = k_advantage_with_value(mdp, pi, v_mu, k);
  const ActionValueTable corr = k_step_lookahead(mdp, pi, gap, k, /*include_rewards=*/false);

  PdlTerms terms;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      const double ds = d_mu[t][s];
      if (t >= 1) terms.lhs += mdp.gamma * ds * gap(t, s);
      for (std::size_t a = 0; a < A; ++a) {
        const double w = ds * mu.prob(t, s, a);
        terms.advantage += w * adv(t, s, a);
        terms.correction += w * corr(t, s, a);
      }
    }
  }
  return terms;
}

double pdl_residual(const TabularMDP& mdp, const TabularPolicy& mu, const TabularPolicy& pi,
                    std::size_t k) {
  const PdlTerms terms = pdl_terms(mdp, mu, pi, k);
  return std::abs(terms.lhs - terms.advantage - terms.correction);
}

TabularMDP random_mdp(std::size_t n_states, std::size_t n_actions, std::size_t horizon,
                      double gamma, Rng& rng) {
  TabularMDP mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.horizon = horizon;
  mdp.gamma = gamma;
  mdp.transition.reserve(n_states * n_actions * n_states);
  for (std::size_t sa = 0; sa < n_states * n_actions; ++sa) {
    auto row = random_simplex(n_states, rng);
    mdp.transition.insert(mdp.transition.end(), row.begin(), row.end());
  }
  mdp.reward.resize(n_states * n_actions);
  for (double& r : mdp.reward) r = uniform01(rng);
  mdp.initial = random_simplex(n_states, rng);
  mdp.validate();
  return mdp;
}

TabularPolicy random_policy(std::size_t n_states, std::size_t n_actions, Rng& rng,
                            std::size_t time_tables) {
  TabularPolicy policy{n_states, n_actions, {}};
  for (std::size_t i = 0; i < std::max<std::size_t>(time_tables, 1); ++i) {
    std::vector<double> table;
    table.reserve(n_states * n_actions);
    for (std::size_t s = 0; s < n_states; ++s) {
      auto row = random_simplex(n_actions, rng);
      table.insert(table.end(), row.begin(), row.end());
    }
    policy.tables.push_back(std::move(table));
  }
  return policy;
}

TabularPolicy random_deterministic_policy(std::size_t n_states, std::size_t n_actions, Rng& rng) {
  std::vector<std::size_t> actions(n_states);
  for (auto& a : actions) a = uniform_index(rng, n_actions);
  return TabularPolicy::deterministic(n_actions, actions);
}

}  // namespace shpi::tabular
