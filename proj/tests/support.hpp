#pragma once

// Shared fixtures for the unit tests and the acceptance binary.

#include <Eigen/Dense>
#include <vector>

#include "shpi/core/rng.hpp"
#include "shpi/core/tabular.hpp"
#include "shpi/core/types.hpp"
#include "shpi/env/tabular_env.hpp"

namespace shpi::testing {

/// Stationary discounted value of a stationary policy, (I - gamma P_pi)^-1 r_pi,
/// solved directly instead of by backward induction.
inline Eigen::VectorXd stationary_value(const tabular::TabularMDP& m, const tabular::TabularPolicy& pi) {
  const auto n = static_cast<Eigen::Index>(m.n_states);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
  for (std::size_t s = 0; s < m.n_states; ++s) {
    for (std::size_t a = 0; a < m.n_actions; ++a) {
      const double w = pi.prob(0, s, a);
      r(static_cast<Eigen::Index>(s)) += w * m.r(s, a);
      for (std::size_t y = 0; y < m.n_states; ++y) p(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(y)) += w * m.p(s, a, y);
    }
  }
  const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) - m.gamma * p;
  return lhs.partialPivLu().solve(r);
}

/// Logs `episodes` streams of `length` steps under a stationary tabular policy
/// and cuts each into one window per stream.
inline Dataset tabular_stream_dataset(const tabular::TabularMDP& m, const tabular::TabularPolicy& mu,
                                      std::size_t episodes, std::size_t length, std::uint64_t seed,
                                      env::TabularEncoding encoding = env::TabularEncoding::kState) {
  tabular::TabularMDP long_mdp = m;
  long_mdp.horizon = length;
  env::TabularEnv environment(long_mdp, encoding);
  const env::TabularContextPolicy policy(mu, encoding);
  Rng rng(seed);
  Dataset out;
  for (std::size_t e = 0; e < episodes; ++e) {
    std::vector<Step> stream;
    Context x = environment.reset(derive_seed(seed, e));
    while (!environment.done()) {
      Step step;
      step.context = x;
      step.time_index = environment.time();
      const auto probs = policy.probabilities(x);
      step.action = policy.sample(x, rng);
      step.propensity = probs[step.action];
      const env::EnvStep next = environment.step(step.action);
      step.reward = next.reward;
      x = next.next_context;
      stream.push_back(std::move(step));
    }
    Dataset d = window_stream(stream, length, length, m.gamma, m.n_actions, e);
    if (out.empty()) {
      out = std::move(d);
    } else {
      out.append(d);
    }
  }
  return out;
}

}  // namespace shpi::testing
