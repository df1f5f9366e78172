#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "shpi/advantages/diagnostics.hpp"
#include "shpi/env/environment.hpp"
#include "shpi/env/hiv.hpp"
#include "shpi/env/submodular.hpp"
#include "shpi/env/synthetic.hpp"
#include "shpi/harness/behavior.hpp"
#include "shpi/harness/evaluation.hpp"
#include "shpi/improve/shpi.hpp"

namespace shpi::harness {

struct EnvironmentSection {
  std::string name = "synth";  ///< synth | hiv | submod
  env::SynthEnvConfig synth{};
  env::HivEnvConfig hiv{};
  env::SubmodEnvConfig submod{};
};

struct LoggingSection {
  SarsaOptions sarsa{};
  double epsilon = 0.3;
  /// Optional pre-trained behavior policy file; skips SARSA when set.
  std::string policy_file;
};

struct DatasetSection {
  std::size_t episodes = 200;
  std::size_t window = 28;
  std::size_t step = 20;
  double gamma = 0.99;
  double bias_mean = 0.0;
  double bias_std = 0.0;
  std::size_t bias_period = 10;
};

struct ValueSection {
  std::vector<std::size_t> hidden{32, 32};
  valuation::ValueFitOptions fit{};
  /// Replace the logged rewards by backshift estimates from the fitted value.
  bool backshift = false;
  /// Optional pre-trained value model file; skips fitting when set.
  std::string external_file;
};

struct AlgorithmSection {
  std::string name = "shpi-offline";  ///< shpi-online | shpi-offline | cb | session-rl | cpi-full-k
  improve::ShpiConfig shpi{};
};

struct EvaluationSection {
  std::size_t rollouts = 200;
  std::size_t seeds = 5;
  std::string metric = "";  ///< empty picks the environment's default
};

struct AblationSection {
  std::vector<std::size_t> k{1, 2, 5, 10, 28};
  std::size_t probes = 200;
  std::size_t truth_rollouts = 30;
  advantages::MseTruth truth = advantages::MseTruth::kLongTerm;
  /// Policy whose advantages are scored: "learned" (offline SHPI) or "behavior" (greedy logging critic).
  std::string policy = "learned";
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  EnvironmentSection environment{};
  LoggingSection logging{};
  DatasetSection dataset{};
  ValueSection value{};
  AlgorithmSection algorithm{};
  EvaluationSection evaluation{};
  /// Algorithms compared by `run`; "logging" is the behavior policy itself.
  std::vector<std::string> compare{"logging"};
  AblationSection ablation{};

  void validate() const;
};

/// Parses JSON text. Missing keys keep their defaults; unknown keys and
/// ill-typed values throw std::invalid_argument naming the key path.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Full JSON dump with every field, two-space indented.
std::string dump_config(const ExperimentConfig& config);

std::unique_ptr<env::Environment> make_environment(const EnvironmentSection& section);
/// delta for synth, mean-per-step for submod, sum for hiv, unless overridden.
MetricMode metric_for(const ExperimentConfig& config);

}  // namespace shpi::harness
