#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "shpi/core/policy.hpp"
#include "shpi/env/bandit_env.hpp"
#include "shpi/env/hiv.hpp"
#include "shpi/env/submodular.hpp"
#include "shpi/env/synthetic.hpp"
#include "shpi/env/tabular_env.hpp"

namespace shpi::env {
namespace {

// Per-coordinate quartic minimized by bisection on its derivative.
double quartic_minimizer() {
  auto grad = [](double x) { return 4.0 * x * x * x - 32.0 * x + 5.0; };
  double lo = -4.0, hi = -2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (grad(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TEST(StyblinskiTang, KnownValues) {
  const std::vector<double> zero{0.0, 0.0}, one{1.0};
  EXPECT_EQ(styblinski_tang(zero), 0.0);
  EXPECT_EQ(styblinski_tang(one), -5.0);
  EXPECT_THROW(styblinski_tang(std::vector<double>{}), std::invalid_argument);
}

TEST(StyblinskiTang, GlobalMinimumInTwoDimensions) {
  const double x = quartic_minimizer();
  EXPECT_NEAR(x, -2.903534, 1e-6);
  const std::vector<double> point{x, x};
  EXPECT_NEAR(styblinski_tang(point), -78.33234, 1e-5);
  for (double dx : {-1e-3, 1e-3}) {
    const std::vector<double> moved{x + dx, x};
    EXPECT_GT(styblinski_tang(moved), styblinski_tang(point));
  }
}

SynthEnvConfig window_one(std::size_t dim = 2) {
  SynthEnvConfig c;
  c.dim = dim;
  c.n_actions = 3;
  c.action_window = 1;
  c.context_window = 1;
  c.horizon = 10;
  c.seed = 4;
  return c;
}

TEST(SyntheticEnv, ZeroActionIsAFixedPoint) {
  SyntheticEnv env(window_one());
  env.set_action_vectors({{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}});
  const Context start = env.reset(3);
  const std::vector<double> w0 = env.latent();
  for (int t = 0; t < 5; ++t) {
    const EnvStep s = env.step(1);
    EXPECT_EQ(env.latent(), w0);
    EXPECT_EQ(s.next_context, start);
    EXPECT_EQ(s.next_context.features, env.latent());
  }
}

TEST(SyntheticEnv, AdditiveDynamicsWithUnitWindows) {
  SyntheticEnv env(window_one());
  env.set_action_vectors({{0.5, -1.0}, {0.0, 0.0}, {2.0, 3.0}});
  env.reset(8);
  std::vector<double> w = env.latent();
  for (std::size_t a : {0u, 2u, 2u, 1u}) {
    const std::vector<double>& v = env.action_vector(a);
    env.step(a);
    for (std::size_t j = 0; j < 2; ++j) {
      w[j] += v[j];
      EXPECT_NEAR(env.latent()[j], w[j], 1e-12);
    }
  }
}

TEST(SyntheticEnv, RewardIsNegatedSurfaceOverDimension) {
  SynthEnvConfig c;
  c.seed = 1;
  SyntheticEnv env(c);
  env.reset(2);
  const EnvStep s = env.step(0);
  EXPECT_DOUBLE_EQ(s.reward, -styblinski_tang(s.next_context.features) / 2.0);
}

TEST(SyntheticEnv, InitialLatentCenteredAtMinusTenOnOneCoordinate) {
  SynthEnvConfig c;
  c.action_window = 1;
  c.context_window = 1;
  SyntheticEnv env(c);
  int far = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    env.reset(seed);
    const auto& w = env.latent();
    const bool first = std::abs(w[0] + 10.0) < 5.0, second = std::abs(w[1] + 10.0) < 5.0;
    EXPECT_NE(first, second);
    far += first ? 1 : 0;
  }
  EXPECT_GT(far, 60);
  EXPECT_LT(far, 140);
}

TEST(SyntheticEnv, ZeroActionsHoldContextAfterWarmup) {
  SynthEnvConfig c;
  c.action_window = 5;
  c.context_window = 30;
  c.horizon = 200;
  SyntheticEnv env(c);
  env.set_action_vectors(std::vector<std::vector<double>>(c.n_actions, std::vector<double>(2, 0.0)));
  env.reset(6);
  Rng rng(1);
  std::vector<Context> contexts;
  for (int t = 0; t < 200; ++t) contexts.push_back(env.step(uniform_index(rng, c.n_actions)).next_context);
  // The latent average of a constant-free linear recursion converges geometrically.
  for (std::size_t t = 150; t < 200; ++t) {
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(contexts[t].features[j], contexts[199].features[j], 1e-6);
  }
}

TEST(SyntheticEnv, DeterministicUnderSeedAndActions) {
  SynthEnvConfig c;
  c.seed = 12;
  auto rollout = [&]() {
    SyntheticEnv env(c);
    UniformPolicy pi(c.n_actions);
    Rng rng(77);
    std::vector<double> out;
    Context x = env.reset(5);
    while (!env.done()) {
      const EnvStep s = env.step(pi.sample(x, rng));
      x = s.next_context;
      out.push_back(s.reward);
      out.insert(out.end(), x.features.begin(), x.features.end());
    }
    return out;
  };
  const auto a = rollout(), b = rollout();
  ASSERT_EQ(a.size(), 150u * 3u);
  EXPECT_EQ(a, b);
}

TEST(SyntheticEnv, DoneOnlyAtHorizonAndThenThrows) {
  SyntheticEnv env(window_one());
  EXPECT_THROW(env.step(0), std::logic_error);
  env.reset(1);
  for (int t = 0; t < 10; ++t) EXPECT_EQ(env.step(0).done, t == 9);
  EXPECT_THROW(env.step(0), std::logic_error);
}

TEST(SyntheticEnv, CloneContinuesIdentically) {
  SynthEnvConfig c;
  SyntheticEnv env(c);
  env.reset(3);
  for (int t = 0; t < 7; ++t) env.step(t % 10);
  auto copy = env.clone();
  for (int t = 0; t < 20; ++t) EXPECT_EQ(env.step(t % 10).reward, copy->step(t % 10).reward);
}

// Newton's method on the zero-drug vector field with a finite-difference
// Jacobian, started from the published rounded equilibrium.
HivState solve_equilibrium(const HivParameters& p) {
  HivState x = hiv_initial_state();
  for (int iter = 0; iter < 50; ++iter) {
    const HivState f = hiv_derivative(x, 0.0, 0.0, p);
    Eigen::Matrix<double, 6, 6> jac;
    for (int j = 0; j < 6; ++j) {
      HivState xp = x;
      const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
      xp[j] += h;
      const HivState fp = hiv_derivative(xp, 0.0, 0.0, p);
      for (int i = 0; i < 6; ++i) jac(i, j) = (fp[i] - f[i]) / h;
    }
    Eigen::Matrix<double, 6, 1> rhs;
    for (int i = 0; i < 6; ++i) rhs(i) = -f[i];
    const Eigen::Matrix<double, 6, 1> dx = jac.fullPivLu().solve(rhs);
    double change = 0.0;
    for (int i = 0; i < 6; ++i) {
      x[i] += dx(i);
      change = std::max(change, std::abs(dx(i)) / std::max(1.0, std::abs(x[i])));
    }
    if (change < 1e-14) break;
  }
  return x;
}

TEST(Hiv, ZeroDrugEquilibriumIsStationary) {
  const HivEnvConfig config;
  const HivState eq = solve_equilibrium(config.params);
  const HivState published = hiv_initial_state();
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(eq[i], published[i], 0.02 * published[i] + 1.0) << i;
    EXPECT_GT(eq[i], 0.0);
  }
  const HivTransition step = hiv_step(eq, 0, config);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(step.state[i], eq[i], 1e-6 * eq[i]) << i;
}

TEST(Hiv, ZeroDrugRewardHasNoDosagePenalty) {
  const HivParameters p;
  const HivState x = hiv_initial_state();
  EXPECT_DOUBLE_EQ(hiv_reward(x, 0.0, 0.0, p), -(p.q_virus * x[4] - p.s_immune * x[5]));
  EXPECT_LT(hiv_reward(x, 0.7, 0.3, p), hiv_reward(x, 0.0, 0.0, p));
}

double hiv_return(const std::vector<std::size_t>& actions, std::size_t substeps) {
  HivEnvConfig config;
  config.substeps = substeps;
  HivState x = hiv_initial_state();
  double total = 0.0;
  for (std::size_t a : actions) {
    const HivTransition tr = hiv_step(x, a, config);
    x = tr.state;
    total += tr.reward;
  }
  return total;
}

TEST(Hiv, StepHalvingChangesReturnByLessThanATenthOfAPercent) {
  Rng rng(9);
  std::vector<std::size_t> actions(200);
  for (auto& a : actions) a = uniform_index(rng, 4);
  const double coarse = hiv_return(actions, 1000);
  const double fine = hiv_return(actions, 2000);
  EXPECT_LT(std::abs(coarse - fine), 1e-3 * std::abs(fine));
}

TEST(Hiv, StateStaysNonnegative) {
  HivEnvConfig config;
  config.horizon = 60;
  config.substeps = 200;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    HivEnv env(config);
    env.reset(seed);
    Rng rng(seed + 100);
    while (!env.done()) {
      env.step(uniform_index(rng, 4));
      for (double v : env.state()) ASSERT_GE(v, 0.0);
    }
  }
}

TEST(Hiv, RejectsNonFiniteState) {
  HivState x = hiv_initial_state();
  x[4] = std::nan("");
  EXPECT_THROW(hiv_step(x, 0, HivEnvConfig{}), std::invalid_argument);
}

TEST(Hiv, EncodingIsLogScaled) {
  const Context c = HivEnv::encode({9.0, 0.0, 99.0, 0.0, 999.0, 0.0});
  EXPECT_NEAR(c.features[0], 1.0, 1e-12);
  EXPECT_NEAR(c.features[2], 2.0, 1e-12);
  EXPECT_NEAR(c.features[4], 3.0, 1e-12);
  EXPECT_EQ(c.features[1], 0.0);
}

TEST(ClickedMax, EmptySetHasZeroValue) {
  ClickedMax m(3);
  const std::vector<double> omega{1.0, 2.0, 3.0};
  EXPECT_EQ(m.value(omega), 0.0);
}

TEST(ClickedMax, IdempotentAndUnitExample) {
  const std::vector<double> omega{1.0, 1.0};
  ClickedMax m(2);
  m.add(std::vector<double>{1.0, 0.0});
  const double once = m.value(omega);
  m.add(std::vector<double>{1.0, 0.0});
  EXPECT_EQ(m.value(omega), once);
  m.add(std::vector<double>{0.0, 1.0});
  EXPECT_DOUBLE_EQ(m.value(omega), 2.0);
}

TEST(ClickedMax, MonotoneAndSubmodularOnRandomSets) {
  Rng rng(21);
  const std::size_t dim = 6, items = 12;
  std::vector<std::vector<double>> e(items, std::vector<double>(dim));
  for (auto& v : e)
    for (double& x : v) x = standard_normal(rng);
  std::vector<double> omega(dim);
  for (double& w : omega) w = uniform01(rng);
  auto value = [&](const std::vector<std::size_t>& set) {
    ClickedMax m(dim);
    for (std::size_t i : set) m.add(e[i]);
    return m.value(omega);
  };
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::size_t> a, b;
    for (std::size_t i = 0; i < items; ++i) {
      const double u = uniform01(rng);
      if (u < 0.25) a.push_back(i);
      if (u < 0.6) b.push_back(i);
    }
    const std::size_t j = uniform_index(rng, items);
    auto with = [&](std::vector<std::size_t> s) {
      s.push_back(j);
      return value(s);
    };
    const double gain_a = with(a) - value(a), gain_b = with(b) - value(b);
    EXPECT_GE(gain_a, -1e-12);
    EXPECT_GE(gain_a, gain_b - 1e-12);
    EXPECT_GE(value(b), value(a) - 1e-12);
  }
}

TEST(SubmodularEnv, ReturnEqualsFinalSetValue) {
  SubmodEnvConfig c;
  c.n_items = 20;
  c.embed_dim = 8;
  c.horizon = 50;
  c.seed = 3;
  SubmodularEnv env(c);
  EXPECT_EQ(env.context_dim(), 16u);
  env.reset(4);
  EXPECT_EQ(env.long_term_value(), 0.0);
  Rng rng(5);
  double total = 0.0;
  while (!env.done()) total += env.step(uniform_index(rng, c.n_items)).reward;
  EXPECT_NEAR(total, env.long_term_value(), 1e-9);
  EXPECT_GT(env.long_term_value(), 0.0);
}

TEST(SubmodularEnv, NoClicksMeansZeroReward) {
  SubmodEnvConfig c;
  c.n_items = 5;
  c.embed_dim = 4;
  c.click_offset = -1e6;
  SubmodularEnv env(c);
  env.reset(1);
  for (int t = 0; t < 20; ++t) {
    EXPECT_EQ(env.step(t % 5).reward, 0.0);
    EXPECT_FALSE(env.last_clicked());
  }
}

TEST(SubmodularEnv, RejectsNegativeAffinity) {
  SubmodEnvConfig c;
  c.embed_dim = 2;
  c.affinity = {1.0, -0.5};
  EXPECT_THROW(SubmodularEnv{c}, std::invalid_argument);
}

TEST(SubmodularEnv, DeterministicUnderSeed) {
  SubmodEnvConfig c;
  c.seed = 9;
  auto run = [&]() {
    SubmodularEnv env(c);
    env.reset(2);
    std::vector<double> rewards;
    while (!env.done()) rewards.push_back(env.step(env.time() % c.n_items).reward);
    return rewards;
  };
  EXPECT_EQ(run(), run());
}

TEST(TabularEnv, EncodingRoundTripsAndFollowsTransitions) {
  tabular::TabularMDP m;
  m.n_states = 2;
  m.n_actions = 2;
  m.transition = {0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0};
  m.reward = {1.0, 2.0, 3.0, 4.0};
  m.initial = {1.0, 0.0};
  m.horizon = 3;
  m.gamma = 1.0;
  TabularEnv env(m, TabularEncoding::kTimeState);
  EXPECT_EQ(env.context_dim(), encoded_dim(TabularEncoding::kTimeState, 2, 3));
  Context x = env.reset(0);
  EXPECT_EQ(decode_state(TabularEncoding::kTimeState, 2, x), std::make_pair(std::size_t{0}, std::size_t{0}));
  EnvStep s = env.step(0);
  EXPECT_EQ(s.reward, 1.0);
  EXPECT_EQ(env.state(), 1u);
  EXPECT_EQ(decode_state(TabularEncoding::kTimeState, 2, s.next_context), std::make_pair(std::size_t{1}, std::size_t{1}));
  s = env.step(1);
  EXPECT_EQ(s.reward, 4.0);
  EXPECT_EQ(env.state(), 1u);
  env.force(1, 0);
  EXPECT_EQ(env.time(), 1u);
  EXPECT_EQ(env.step(1).reward, 2.0);
}

TEST(ContextualBanditEnv, RewardsAreMeansWithoutNoise) {
  BanditConfig c;
  c.means = {{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}};
  ContextualBanditEnv env(c);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Context x = env.reset(seed);
    const std::size_t ctx = env.current();
    EXPECT_EQ(x.features[ctx], 1.0);
    EXPECT_EQ(env.step(1).reward, c.means[ctx][1]);
  }
}

}  // namespace
}  // namespace shpi::env
