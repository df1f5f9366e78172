#pragma once

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "shpi/advantages/diagnostics.hpp"
#include "shpi/harness/config.hpp"

namespace shpi::harness {

/// A failure inside one pipeline stage; what() starts with the stage name.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Runs `body`, rethrowing any exception as a StageError for `stage`.
template <typename F>
auto run_stage(const std::string& stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

/// Seeds of the evaluation runs: derive_seed(derive_seed(master, "evaluation"), i).
std::vector<std::uint64_t> evaluation_seeds(const ExperimentConfig& config);

/// Greedy policy of the SARSA critic, or the configured policy file.
improve::GreedyPolicy behavior_stage(const ExperimentConfig& config, const env::Environment& env);
/// The epsilon-corrupted behavior run on the environment, with optional
/// reward bias applied to the logged data.
Dataset collect_stage(const ExperimentConfig& config, const env::Environment& env, const Policy& logging);

struct ValueStageResult {
  valuation::ValueModel value;
  Dataset training;  ///< the dataset the learner sees (backshifted if configured)
};
ValueStageResult value_stage(const ExperimentConfig& config, const Dataset& dataset);

/// Trains `algorithm` (shpi-online | shpi-offline | cb | session-rl | cpi-full-k).
improve::ShpiResult train_stage(const ExperimentConfig& config, const std::string& algorithm,
                                const Dataset& training, const valuation::ValueModel& value,
                                const env::Environment& env, const Policy& logging);

struct ComparisonRow {
  std::string algorithm;
  EvalReport report;
};

/// Full pipeline: behavior -> collect -> value -> train each compared
/// algorithm -> evaluate. Writes behavior.txt, dataset.csv, value.txt,
/// policy_<algo>.txt, metrics_<algo>.csv, comparison.csv (algo,mean,std) and
/// summary.txt into `outdir`.
std::vector<ComparisonRow> run_experiment(const ExperimentConfig& config, const std::filesystem::path& outdir);

struct AblationRow {
  std::size_t k = 0;
  advantages::MseRow mse;
  EvalReport report;
};

/// For every k in config.ablation.k: offline advantage MSE against online
/// truth (pi = the policy learned at the configured k) and the evaluated
/// return of offline SHPI run with that k. Writes mse.csv and ablation.csv.
std::vector<AblationRow> ablate_k(const ExperimentConfig& config, const std::filesystem::path& outdir);

}  // namespace shpi::harness
