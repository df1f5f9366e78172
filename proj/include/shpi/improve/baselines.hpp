#pragma once

#include "shpi/improve/shpi.hpp"

namespace shpi::improve {

/// Online contextual bandit: regresses the observed immediate rewards of the
/// same interaction stream online_shpi would collect (same episode seeds,
/// same regression seeds), with no lookahead.
ShpiResult online_contextual_bandit(const env::Environment& prototype, const Policy& mu, const ShpiConfig& config,
                                    std::uint64_t seed, const PolicyEvaluator& evaluate = {});

/// Session-based episodic RL: no bonus, advantages to the end of the window.
ShpiConfig session_rl_config(ShpiConfig base, std::size_t window_length);

/// Full-advantage policy iteration: advantages to the end of the window with
/// the fitted value as baseline.
ShpiConfig full_advantage_config(ShpiConfig base, std::size_t window_length);

/// Offline contextual bandit: k = 1 and no bonus.
ShpiConfig contextual_bandit_config(ShpiConfig base);

}  // namespace shpi::improve
