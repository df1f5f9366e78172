#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "shpi/advantages/advantages.hpp"
#include "shpi/advantages/diagnostics.hpp"
#include "support.hpp"

namespace shpi::advantages {
namespace {

using env::TabularEncoding;

/// Policy given by a lambda over the context.
class FunctionPolicy final : public Policy {
 public:
  FunctionPolicy(std::size_t n, std::function<void(const Context&, std::span<double>)> f) : n_(n), f_(std::move(f)) {}
  std::size_t action_count() const override { return n_; }
  using Policy::probabilities;
  void probabilities(const Context& x, std::span<double> out) const override { f_(x, out); }

 private:
  std::size_t n_;
  std::function<void(const Context&, std::span<double>)> f_;
};

/// Deterministic policy that plays features[0] as the action.
FunctionPolicy replay_policy(std::size_t n) {
  return FunctionPolicy(n, [](const Context& x, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[static_cast<std::size_t>(x.features[0])] = 1.0;
  });
}

Trajectory uniform_logged(const std::vector<std::size_t>& actions, std::size_t n_actions) {
  Trajectory t;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    Step s;
    s.context.features = {static_cast<double>(actions[i])};
    s.action = actions[i];
    s.propensity = 1.0 / static_cast<double>(n_actions);
    s.reward = 1.0;
    s.time_index = i;
    t.steps.push_back(s);
  }
  return t;
}

TEST(ImportanceWeight, EmptyRangeIsOne) {
  const Trajectory t = uniform_logged({1, 2, 3}, 4);
  const auto pi = replay_policy(4);
  EXPECT_EQ(importance_weight(pi, t, 2, 1), 1.0);
  EXPECT_EQ(importance_weight(pi, t, 3, 2), 1.0);
}

TEST(ImportanceWeight, DeterministicMatchUnderUniformLogging) {
  const Trajectory t = uniform_logged({1, 2}, 4);
  const auto pi = replay_policy(4);
  EXPECT_DOUBLE_EQ(importance_weight(pi, t, 0, 1), 16.0);
  EXPECT_DOUBLE_EQ(importance_weight(pi, t, 0, 1, ClipBounds{0.5, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(importance_weight(pi, t, 0, 1, ClipBounds{0.5, 2.0}, ClipMode::kPerFactor), 2.0);
}

TEST(ImportanceWeight, SamePolicyGivesOne) {
  const Trajectory t = uniform_logged({0, 3, 1, 2, 2}, 4);
  const UniformPolicy mu(4);
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = a; b < 5; ++b) {
      EXPECT_DOUBLE_EQ(importance_weight(mu, t, a, b), 1.0);
      EXPECT_DOUBLE_EQ(importance_weight(mu, t, a, b, ClipBounds{0.5, 2.0}), 1.0);
    }
}

TEST(ImportanceWeight, ClippedWeightsStayInBounds) {
  Rng rng(3);
  const FunctionPolicy skewed(3, [](const Context& x, std::span<double> out) {
    const double p = 0.05 + 0.9 * std::fmod(std::abs(x.features[0]) * 0.37, 1.0);
    out[0] = p;
    out[1] = (1.0 - p) * 0.5;
    out[2] = (1.0 - p) * 0.5;
  });
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::size_t> actions(6);
    for (auto& a : actions) a = uniform_index(rng, 3);
    const Trajectory t = uniform_logged(actions, 3);
    for (ClipMode mode : {ClipMode::kCumulative, ClipMode::kPerFactor}) {
      const double w = importance_weight(skewed, t, 1, 5, ClipBounds{0.7, 1.5}, mode);
      EXPECT_GE(w, 0.7);
      EXPECT_LE(w, 1.5);
    }
  }
}

TEST(ImportanceWeight, RejectsBadPropensityAndRange) {
  Trajectory t = uniform_logged({1, 2}, 4);
  const auto pi = replay_policy(4);
  EXPECT_THROW(importance_weight(pi, t, 0, 2), std::out_of_range);
  t.steps[1].propensity = 0.0;
  EXPECT_THROW(importance_weight(pi, t, 0, 1), std::invalid_argument);
}

TEST(ClipBounds, Validation) {
  EXPECT_NO_THROW((ClipBounds{0.5, 2.0}.validate()));
  EXPECT_NO_THROW((ClipBounds{1.0, 1.0}.validate()));
  EXPECT_THROW((ClipBounds{0.0, 2.0}.validate()), std::invalid_argument);
  EXPECT_THROW((ClipBounds{1.5, 2.0}.validate()), std::invalid_argument);
  EXPECT_THROW((ClipBounds{0.5, 0.9}.validate()), std::invalid_argument);
}

struct TabularCase {
  tabular::TabularMDP mdp;
  tabular::TabularPolicy mu, pi;
  Dataset data;
  valuation::ValueModel value;
};

TabularCase make_case(std::uint64_t seed, std::size_t episodes, std::size_t horizon = 4) {
  Rng rng(seed);
  TabularCase c;
  c.mdp = tabular::random_mdp(3, 2, horizon, 0.9, rng);
  c.mu = tabular::random_policy(3, 2, rng);
  c.pi = tabular::random_policy(3, 2, rng);
  c.data = testing::tabular_stream_dataset(c.mdp, c.mu, episodes, horizon, seed + 1, TabularEncoding::kTimeState);
  c.value = valuation::value_from_table(tabular::dp_value(c.mdp, c.mu), TabularEncoding::kTimeState, 0.9);
  return c;
}

struct CellStats {
  double sum = 0.0, sq = 0.0, n = 0.0;
  double mean() const { return sum / n; }
  double stderr_() const { return std::sqrt((sq / n - mean() * mean()) / n); }
};

std::map<std::tuple<std::size_t, std::size_t, std::size_t>, CellStats> cell_stats(const AdvantageTable& table,
                                                                                 std::size_t n_states) {
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, CellStats> cells;
  for (const auto& e : table.entries) {
    const auto [t, s] = env::decode_state(TabularEncoding::kTimeState, n_states, e.context);
    auto& c = cells[{t, s, e.action}];
    c.sum += e.estimate;
    c.sq += e.estimate * e.estimate;
    c.n += 1.0;
  }
  return cells;
}

TEST(OfflineAdvantages, UnclippedPdisMatchesDynamicProgramming) {
  const TabularCase c = make_case(11, 100'000);
  const env::TabularContextPolicy pi(c.pi, TabularEncoding::kTimeState);
  for (BonusWeight bonus : {BonusWeight::kThroughBonus, BonusWeight::kReachedState}) {
    for (std::size_t k : {1u, 2u, 3u}) {
      OfflineOptions o;
      o.k = k;
      o.clip = ClipBounds{1e-6, 1e6};
      o.bonus_weight = bonus;
      const AdvantageTable table = offline_k_advantages(c.data, pi, c.value, o);
      const auto truth = tabular::dp_k_advantage(c.mdp, c.mu, c.pi, k);
      for (const auto& [key, stats] : cell_stats(table, 3)) {
        const auto [t, s, a] = key;
        ASSERT_GT(stats.n, 100.0);
        EXPECT_LE(std::abs(stats.mean() - truth(t, s, a)), 3.0 * stats.stderr_() + 1e-12)
            << "k " << k << " t " << t << " s " << s << " a " << a;
      }
    }
  }
}

TEST(OfflineAdvantages, SamePolicyAveragesToZeroPerState) {
  const TabularCase c = make_case(12, 20'000);
  const env::TabularContextPolicy mu(c.mu, TabularEncoding::kTimeState);
  OfflineOptions o;
  o.k = 2;
  const AdvantageTable table = offline_k_advantages(c.data, mu, c.value, o);
  std::map<std::pair<std::size_t, std::size_t>, CellStats> per_state;
  for (const auto& e : table.entries) {
    auto& cell = per_state[env::decode_state(TabularEncoding::kTimeState, 3, e.context)];
    cell.sum += e.estimate;
    cell.sq += e.estimate * e.estimate;
    cell.n += 1.0;
  }
  for (const auto& [key, stats] : per_state) EXPECT_LE(std::abs(stats.mean()), 3.0 * stats.stderr_());
}

TEST(OfflineAdvantages, OneStepIsTemporalDifferenceRegardlessOfPolicy) {
  const TabularCase c = make_case(13, 50);
  const auto greedy = tabular::TabularPolicy::deterministic(3, {1, 0, 1});
  const env::TabularContextPolicy pi(greedy, TabularEncoding::kTimeState);
  OfflineOptions o;
  o.k = 1;
  o.bonus_weight = BonusWeight::kReachedState;
  const AdvantageTable table = offline_k_advantages(c.data, pi, c.value, o);
  ASSERT_EQ(table.entries.size(), 50u * 3u);
  for (const auto& e : table.entries) {
    const Trajectory& traj = c.data.trajectories[e.trajectory];
    const double td = traj[e.t].reward + 0.9 * c.value(traj[e.t + 1].context) - c.value(traj[e.t].context);
    EXPECT_NEAR(e.estimate, td, 1e-12);
  }
  // With a zero bonus the through-bonus form reduces to the logged reward.
  o.bonus_weight = BonusWeight::kThroughBonus;
  const auto zero = valuation::ValueModel::zero(c.value.regressor.input_dim(), 0.9);
  for (const auto& e : offline_k_advantages(c.data, pi, zero, o).entries)
    EXPECT_EQ(e.estimate, c.data.trajectories[e.trajectory][e.t].reward);
}

TEST(OfflineAdvantages, PositionsRespectTheWindow) {
  const TabularCase c = make_case(14, 10, 6);
  const UniformPolicy pi(2);
  for (std::size_t k = 1; k < 6; ++k) {
    OfflineOptions o;
    o.k = k;
    const AdvantageTable table = offline_k_advantages(c.data, pi, c.value, o);
    EXPECT_EQ(table.entries.size(), 10u * (6u - k));
    for (const auto& e : table.entries) EXPECT_LE(e.t + k, 5u);
  }
  OfflineOptions o;
  o.k = 0;
  EXPECT_THROW(offline_k_advantages(c.data, pi, c.value, o), std::invalid_argument);
  o.k = 7;
  EXPECT_THROW(offline_k_advantages(c.data, pi, c.value, o), std::invalid_argument);
}

TEST(OfflineAdvantages, WindowEndModeSumsWeightedRewards) {
  const TabularCase c = make_case(15, 5, 5);
  const env::TabularContextPolicy pi(c.pi, TabularEncoding::kTimeState);
  OfflineOptions o;
  o.k = 5;
  o.clip.reset();
  const auto zero = valuation::ValueModel::zero(c.value.regressor.input_dim(), 0.9);
  const AdvantageTable table = offline_k_advantages(c.data, pi, zero, o);
  EXPECT_EQ(table.entries.size(), 5u * 5u);
  for (const auto& e : table.entries) {
    const Trajectory& traj = c.data.trajectories[e.trajectory];
    double expected = 0.0, discount = 1.0;
    for (std::size_t m = e.t; m < traj.size(); ++m) {
      expected += importance_weight(pi, traj, e.t + 1, m) * discount * traj[m].reward;
      discount *= 0.9;
    }
    EXPECT_NEAR(e.estimate, expected, 1e-12);
  }
}

TEST(OfflineAdvantages, UnitClipRemovesPolicyDependence) {
  const TabularCase c = make_case(16, 30);
  const env::TabularContextPolicy a(c.pi, TabularEncoding::kTimeState);
  const env::TabularContextPolicy b(tabular::TabularPolicy::deterministic(3, {0, 0, 1}), TabularEncoding::kTimeState);
  OfflineOptions o;
  o.k = 3;
  o.clip = ClipBounds{1.0, 1.0};
  const auto ta = offline_k_advantages(c.data, a, c.value, o), tb = offline_k_advantages(c.data, b, c.value, o);
  ASSERT_EQ(ta.entries.size(), tb.entries.size());
  for (std::size_t i = 0; i < ta.entries.size(); ++i) EXPECT_EQ(ta.entries[i].estimate, tb.entries[i].estimate);
}

TEST(OfflineAdvantages, TableExportFormat) {
  const TabularCase c = make_case(17, 2, 3);
  OfflineOptions o;
  o.k = 1;
  const AdvantageTable table = offline_k_advantages(c.data, UniformPolicy(2), c.value, o);
  std::stringstream out;
  write_advantage_table(out, table);
  std::string line;
  std::getline(out, line);
  EXPECT_EQ(line, "episode_id,t,action,estimate");
  std::size_t rows = 0;
  while (std::getline(out, line)) ++rows;
  EXPECT_EQ(rows, table.entries.size());
}

TEST(OnlineAdvantage, MatchesDynamicProgramming) {
  Rng rng(20);
  const auto m = tabular::random_mdp(3, 2, 5, 0.9, rng);
  const auto mu = tabular::random_policy(3, 2, rng);
  const auto pi_table = tabular::random_policy(3, 2, rng);
  const env::TabularContextPolicy pi(pi_table, TabularEncoding::kTimeState);
  const auto value = valuation::value_from_table(tabular::dp_value(m, mu), TabularEncoding::kTimeState, 0.9);
  env::TabularEnv environment(m, TabularEncoding::kTimeState);
  for (std::size_t k : {1u, 2u, 3u}) {
    const auto truth = tabular::dp_k_advantage(m, mu, pi_table, k);
    for (std::size_t s = 0; s < 3; ++s) {
      environment.force(1, s);
      const MonteCarloEstimate est = online_k_advantage(environment, pi, value, s % 2, k, 0.9, 100'000, 5 + k);
      EXPECT_LE(std::abs(est.mean - truth(1, s, s % 2)), 3.0 * est.stderr_ + 1e-12) << k << ' ' << s;
    }
  }
}

TEST(OnlineAdvantage, ZeroBonusOverRemainingHorizonIsTheReturn) {
  Rng rng(21);
  const auto m = tabular::random_mdp(3, 2, 4, 0.9, rng);
  const auto pi_table = tabular::random_policy(3, 2, rng);
  const env::TabularContextPolicy pi(pi_table, TabularEncoding::kTimeState);
  const auto zero = valuation::ValueModel::zero(env::encoded_dim(TabularEncoding::kTimeState, 3, 4), 0.9);
  env::TabularEnv environment(m, TabularEncoding::kTimeState);
  environment.force(1, 2);
  const MonteCarloEstimate est = online_k_advantage(environment, pi, zero, 0, 3, 0.9, 100'000, 9);
  const double q = tabular::dp_q(m, pi_table)(1, 2, 0);
  EXPECT_LE(std::abs(est.mean - q), 3.0 * est.stderr_);
}

TEST(OnlineAdvantage, RejectsFinishedEpisode) {
  Rng rng(22);
  const auto m = tabular::random_mdp(2, 2, 3, 0.9, rng);
  env::TabularEnv environment(m, TabularEncoding::kState);
  environment.force(3, 0);
  const auto zero = valuation::ValueModel::zero(2, 0.9);
  EXPECT_THROW(online_k_advantage(environment, UniformPolicy(2), zero, 0, 1, 0.9, 10, 1), std::logic_error);
}

TEST(OnlineAdvantage, OneStepAgreesAcrossOnlineOfflineAndDp) {
  const TabularCase c = make_case(23, 100'000);
  const env::TabularContextPolicy pi(c.pi, TabularEncoding::kTimeState);
  OfflineOptions o;
  o.k = 1;
  o.bonus_weight = BonusWeight::kReachedState;
  const auto offline = cell_stats(offline_k_advantages(c.data, pi, c.value, o), 3);
  const auto truth = tabular::dp_k_advantage(c.mdp, c.mu, c.pi, 1);
  env::TabularEnv environment(c.mdp, TabularEncoding::kTimeState);
  environment.force(0, 1);
  const MonteCarloEstimate online = online_k_advantage(environment, pi, c.value, 1, 1, 0.9, 100'000, 3);
  const CellStats& cell = offline.at({0, 1, 1});
  EXPECT_LE(std::abs(online.mean - truth(0, 1, 1)), 3.0 * online.stderr_);
  EXPECT_LE(std::abs(cell.mean() - truth(0, 1, 1)), 3.0 * cell.stderr_());
}

TEST(BiasBound, ClosedFormCases) {
  EXPECT_EQ(bias_bound(5, 0.9, 2, 20, 2.0, 0.0, 0.0, 0.0, 0.0, 1.0), 0.0);
  EXPECT_NEAR(bias_bound(2000, 0.9, 0, 3000, 2.0, 0.3, 0.0, 0.0, 0.0, 1.0), 2.0 * 0.3 / 0.1, 1e-9);
  // each term in isolation
  const double g = 0.8;
  EXPECT_NEAR(bias_bound(3, g, 2, 10, 1.5, 0.0, 0.0, 0.0, 0.4, 1.0), std::pow(g, 3) * 1.5 * 0.4, 1e-12);
  EXPECT_NEAR(bias_bound(3, g, 2, 10, 1.5, 0.0, 0.0, 0.25, 0.0, 1.0), 0.25, 1e-12);
  EXPECT_NEAR(bias_bound(3, g, 2, 10, 1.5, 0.0, 0.1, 0.0, 0.0, -2.0),
              (1.0 - std::pow(g, 3) + std::pow(g, 5) - std::pow(g, 11)) / (1.0 - g) * 2.0 * 0.1, 1e-12);
  EXPECT_THROW(bias_bound(3, 1.0, 2, 10, 1.5, 0.1, 0.0, 0.0, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(bias_bound(3, 0.9, 2, 10, 1.5, -0.1, 0.0, 0.0, 0.0, 1.0), std::invalid_argument);
}

TEST(BiasBound, DominatesBiasFromCorruptedValue) {
  Rng rng(24);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t horizon = 6;
    const auto m = tabular::random_mdp(4, 3, horizon, 0.9, rng);
    const auto mu = tabular::random_policy(4, 3, rng);
    const auto pi = tabular::random_policy(4, 3, rng);
    tabular::ValueTable corrupted = tabular::dp_value(m, mu);
    for (std::size_t t = 0; t < horizon; ++t)
      for (std::size_t s = 0; s < 4; ++s) corrupted(t, s) += 0.1 * (2.0 * uniform01(rng) - 1.0);
    for (std::size_t k = 1; k <= horizon; ++k) {
      const auto exact = tabular::dp_k_advantage(m, mu, pi, k);
      const auto biased = tabular::k_advantage_with_value(m, pi, corrupted, k);
      for (std::size_t t = 0; t < horizon; ++t) {
        const double bound = bias_bound(k, 0.9, t, horizon, 2.0, 0.0, 0.0, 0.1, 0.1, 1.0);
        for (std::size_t s = 0; s < 4; ++s)
          for (std::size_t a = 0; a < 3; ++a) EXPECT_LE(std::abs(biased(t, s, a) - exact(t, s, a)), bound);
      }
    }
  }
}

TEST(ProbeStates, LiveSnapshots) {
  Rng rng(25);
  const auto m = tabular::random_mdp(3, 2, 8, 0.9, rng);
  const env::TabularEnv prototype(m, TabularEncoding::kTimeState);
  const auto probes = sample_probe_states(prototype, UniformPolicy(2), 50, 3);
  ASSERT_EQ(probes.size(), 50u);
  std::set<std::size_t> times;
  for (const auto& p : probes) {
    EXPECT_FALSE(p->done());
    times.insert(p->time());
  }
  EXPECT_GT(times.size(), 3u);
}

TEST(MseTruth, NamesRoundTrip) {
  EXPECT_EQ(parse_mse_truth(to_string(MseTruth::kLongTerm)), MseTruth::kLongTerm);
  EXPECT_EQ(parse_mse_truth("k-step"), MseTruth::kKStep);
  EXPECT_THROW(parse_mse_truth("exact"), std::invalid_argument);
}

}  // namespace
}  // namespace shpi::advantages
