#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "shpi/advantages/advantages.hpp"
#include "shpi/approx/training.hpp"

namespace shpi::advantages {

/// Closed-form bound on |E[A_hat_(k)] - A_(k)| given the errors of the reward,
/// weight and value estimates:
///   (1 - g^k)/(1 - g) q2 e_r + (1 - g^k + g^(t+k) - g^(T+1))/(1 - g) |r_max| e_w
///   + g^k q2 e_V(t+k) + e_V(t).
/// Throws std::invalid_argument for gamma outside [0, 1) or a negative error.
double bias_bound(std::size_t k, double gamma, std::size_t t, std::size_t horizon, double q2, double eps_r,
                  double eps_w, double eps_v_t, double eps_v_tk, double r_max);

/// Snapshots of `prototype` taken at uniformly drawn times of episodes run
/// with `mu`; every snapshot is a live, unfinished episode.
std::vector<std::unique_ptr<env::Environment>> sample_probe_states(const env::Environment& prototype,
                                                                   const Policy& mu, std::size_t count,
                                                                   std::uint64_t seed);

/// Ground truth the offline estimates are scored against. kLongTerm uses one
/// target per probe for every k: take a, follow pi to the end of the episode,
/// minus the mu value of the probe. kKStep scores each k against its own
/// truncated quantity (a, pi for k-1 steps, then mu).
enum class MseTruth { kLongTerm, kKStep };

std::string to_string(MseTruth truth);
MseTruth parse_mse_truth(const std::string& text);

struct MseOptions {
  std::vector<std::size_t> k_list{1, 2, 5, 10};
  MseTruth truth = MseTruth::kLongTerm;
  std::size_t n_probes = 200;
  std::size_t n_truth_rollouts = 30;
  std::optional<ClipBounds> clip = ClipBounds{};
  BonusWeight bonus_weight = BonusWeight::kThroughBonus;
  std::vector<std::size_t> hidden{32, 32};
  approx::TrainOptions train{};
  std::uint64_t seed = 0;
};

struct MseRow {
  std::size_t k = 0;
  double mse = 0.0;
  double stderr_ = 0.0;
};

/// For each k, regresses the offline k-step advantage table of `dataset` and
/// compares its prediction at sampled probe states (action drawn from mu)
/// with an online ground truth: the return of taking the action, following
/// pi for k - 1 steps and mu afterwards, minus the return of mu, both averaged
/// over n_truth_rollouts. A k equal to the window length is the full
/// advantage: pi is followed until the episode ends. Probe states and truth
/// rollouts are shared across k.
std::vector<MseRow> advantage_mse_diagnostic(const env::Environment& prototype, const Dataset& dataset,
                                             const Policy& mu, const Policy& pi,
                                             const valuation::ValueModel& value, const MseOptions& options);

/// `k,mse,stderr` with a header line.
void write_mse_table(std::ostream& out, const std::vector<MseRow>& rows);
void write_mse_table(const std::filesystem::path& path, const std::vector<MseRow>& rows);

}  // namespace shpi::advantages
