#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "shpi/core/policy.hpp"
#include "shpi/core/types.hpp"
#include "shpi/env/environment.hpp"
#include "shpi/valuation/value_model.hpp"

namespace shpi::advantages {

/// Importance weights are clipped into [q1, q2].
struct ClipBounds {
  double q1 = 0.5;
  double q2 = 2.0;

  void validate() const;
  double apply(double w) const { return w < q1 ? q1 : (w > q2 ? q2 : w); }
};

enum class ClipMode {
  kCumulative,  ///< clip each cumulative product w_{t+1}^{t+m}
  kPerFactor,   ///< clip each ratio before multiplying
};

/// Which product weights the termination bonus V(x_{t+k}).
enum class BonusWeight {
  kReachedState,  ///< w_{t+1}^{t+k-1}: the actions that lead to x_{t+k}
  kThroughBonus,  ///< w_{t+1}^{t+k}: also includes the ratio at x_{t+k}
};

/// prod_{m=t1}^{t2} pi(a_m|x_m) / mu_m with stored propensities; exactly 1 when
/// t1 > t2. Throws on a nonpositive propensity or an index outside the window.
double importance_weight(const Policy& pi, const Trajectory& trajectory, std::size_t t1, std::size_t t2,
                         const std::optional<ClipBounds>& clip = std::nullopt,
                         ClipMode mode = ClipMode::kCumulative);

struct AdvantageEntry {
  std::size_t trajectory = 0;
  std::size_t t = 0;
  Context context;
  std::size_t action = 0;
  double estimate = 0.0;
};

struct AdvantageTable {
  std::vector<AdvantageEntry> entries;
  std::size_t k = 1;
  double gamma = 0.99;
  /// Share of weight evaluations that hit a clip bound.
  double clipped_fraction = 0.0;

  double mean_estimate() const;
};

struct OfflineOptions {
  std::size_t k = 5;
  std::optional<ClipBounds> clip = ClipBounds{};
  ClipMode clip_mode = ClipMode::kCumulative;
  BonusWeight bonus_weight = BonusWeight::kThroughBonus;
};

/// Per-decision importance-sampled k-step advantages for every position t of
/// every window with t + k < W:
///   sum_{m<k} w_{t+1}^{t+m} gamma^m r_{t+m} + w gamma^k V(x_{t+k}) - V(x_t).
/// With k == W there is no complete k-step position; the estimator then runs
/// to the end of the window from every t and credits no bonus.
/// Throws std::invalid_argument when k is 0 or exceeds W.
AdvantageTable offline_k_advantages(const Dataset& dataset, const Policy& pi,
                                    const valuation::ValueModel& value, const OfflineOptions& options);

/// `episode_id,t,action,estimate` with a header line.
void write_advantage_table(std::ostream& out, const AdvantageTable& table);
void write_advantage_table(const std::filesystem::path& path, const AdvantageTable& table);

struct MonteCarloEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

/// Eq-2 style estimate from the state held by `env`: take `action`, follow pi
/// for k - 1 steps, credit gamma^k V(x_{t+k}) unless the episode ended, and
/// subtract V(x_t). Each rollout works on a clone reseeded from `seed`.
/// Throws std::logic_error when env is already done.
MonteCarloEstimate online_k_advantage(const env::Environment& env, const Policy& pi,
                                      const valuation::ValueModel& value, std::size_t action, std::size_t k,
                                      double gamma, std::size_t n_rollouts, std::uint64_t seed);

/// Discounted return from the state held by `env`, taking `first_action`
/// (if given), then `head` for `head_steps` further steps, then `tail` until
/// the episode ends. Averaged over `n_rollouts` reseeded clones.
MonteCarloEstimate rollout_return(const env::Environment& env, std::optional<std::size_t> first_action,
                                  const Policy& head, std::size_t head_steps, const Policy& tail,
                                  double gamma, std::size_t n_rollouts, std::uint64_t seed);

}  // namespace shpi::advantages
