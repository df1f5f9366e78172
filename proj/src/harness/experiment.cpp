#include "shpi/harness/experiment.hpp"

#include <fstream>
#include <sstream>

#include "shpi/core/dataset_io.hpp"
#include "shpi/improve/baselines.hpp"

namespace shpi::harness {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "algo,mean,std\n";
  for (const auto& r : rows) {
    out << r.algorithm << ',' << format_double(r.report.mean) << ',' << format_double(r.report.std) << '\n';
  }
  return out.str();
}

}  // namespace

std::vector<std::uint64_t> evaluation_seeds(const ExperimentConfig& config) {
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < config.evaluation.seeds; ++i) {
    seeds.push_back(derive_seed(derive_seed(config.seed, "evaluation"), i));
  }
  return seeds;
}

improve::GreedyPolicy behavior_stage(const ExperimentConfig& config, const env::Environment& env) {
  return run_stage("behavior", [&] {
    if (!config.logging.policy_file.empty()) return improve::load_policy(config.logging.policy_file);
    return pretrain_behavior(env, config.logging.sarsa, derive_seed(config.seed, "behavior"));
  });
}

Dataset collect_stage(const ExperimentConfig& config, const env::Environment& env, const Policy& logging) {
  return run_stage("collect", [&] {
    Dataset data = collect(env, logging, config.dataset.episodes, config.dataset.window, config.dataset.step,
                           config.dataset.gamma, derive_seed(config.seed, "collect"));
    if (config.dataset.bias_mean != 0.0 || config.dataset.bias_std != 0.0) {
      data = corrupt_rewards(std::move(data), config.dataset.bias_mean, config.dataset.bias_std,
                             config.dataset.bias_period, derive_seed(config.seed, "reward-bias"));
    }
    return data;
  });
}

ValueStageResult value_stage(const ExperimentConfig& config, const Dataset& dataset) {
  return run_stage("fit-value", [&] {
    ValueStageResult out;
    const std::size_t dim = dataset.trajectories.front()[0].context.dim();
    if (!config.value.external_file.empty()) {
      out.value = valuation::ValueModel::load(config.value.external_file);
    } else {
      auto model = config.value.hidden.empty() ? approx::Regressor::linear(dim, 1)
                                               : approx::Regressor::feedforward(dim, 1, config.value.hidden);
      model.initialize(derive_seed(config.seed, "value-init"));
      valuation::ValueFitOptions options = config.value.fit;
      options.train.seed = derive_seed(config.seed, "value-train");
      out.value = valuation::fit_value(dataset, std::move(model), options);
    }
    if (config.value.backshift) {
      out.value = valuation::center_value(std::move(out.value), dataset);
      out.training = valuation::apply_backshift(dataset, out.value);
    } else {
      out.training = dataset;
    }
    return out;
  });
}

improve::ShpiResult train_stage(const ExperimentConfig& config, const std::string& algorithm,
                                const Dataset& training, const valuation::ValueModel& value,
                                const env::Environment& env, const Policy& logging) {
  return run_stage("train", [&] {
    improve::ShpiConfig shpi = config.algorithm.shpi;
    shpi.gamma = training.gamma;
    const std::uint64_t seed = derive_seed(config.seed, "train-" + algorithm);
    if (algorithm == "shpi-online") {
      shpi.mode = improve::Mode::kOnline;
      return improve::online_shpi(env, logging, training, value, shpi, seed);
    }
    shpi.mode = improve::Mode::kOffline;
    if (algorithm == "cb") shpi = improve::contextual_bandit_config(shpi);
    if (algorithm == "session-rl") shpi = improve::session_rl_config(shpi, training.window_length);
    if (algorithm == "cpi-full-k") shpi = improve::full_advantage_config(shpi, training.window_length);
    if (algorithm != "shpi-offline" && algorithm != "cb" && algorithm != "session-rl" &&
        algorithm != "cpi-full-k") {
      throw std::invalid_argument("unknown algorithm: " + algorithm);
    }
    shpi.k = std::min(shpi.k, training.window_length);
    return improve::offline_shpi(training, value, shpi, seed);
  });
}

std::vector<ComparisonRow> run_experiment(const ExperimentConfig& config, const std::filesystem::path& outdir) {
  config.validate();
  std::filesystem::create_directories(outdir);
  auto env = run_stage("environment", [&] { return make_environment(config.environment); });
  const improve::GreedyPolicy behavior = behavior_stage(config, *env);
  const improve::GreedyPolicy logging = corrupt_policy(behavior, config.logging.epsilon);
  const Dataset dataset = collect_stage(config, *env, logging);
  const ValueStageResult value = value_stage(config, dataset);
  run_stage("write", [&] {
    improve::save_policy(outdir / "behavior.txt", logging, {0, config.dataset.gamma, "none", 0, "logging"});
    write_dataset(outdir / "dataset.csv", dataset);
    value.value.save(outdir / "value.txt");
    return 0;
  });

  const MetricMode mode = metric_for(config);
  const auto seeds = evaluation_seeds(config);
  std::vector<ComparisonRow> rows;
  std::ostringstream summary;
  summary << "environment " << config.environment.name << "\n"
          << "seed " << config.seed << "\n"
          << "dataset trajectories " << dataset.trajectories.size() << " steps " << dataset.step_count() << "\n"
          << "value bellman_residual " << format_double(valuation::bellman_residual(value.training.window_length >= 2 ? value.training : dataset, value.value)) << "\n"
          << "metric " << to_string(mode) << "\n";

  for (const std::string& algo : config.compare) {
    ComparisonRow row;
    row.algorithm = algo;
    if (algo == "logging") {
      row.report = run_stage("evaluate", [&] { return evaluate(*env, logging, config.evaluation.rollouts, mode, seeds); });
    } else {
      const improve::ShpiResult result = train_stage(config, algo, value.training, value.value, *env, logging);
      row.report =
          run_stage("evaluate", [&] { return evaluate(*env, result.policy, config.evaluation.rollouts, mode, seeds); });
      run_stage("write", [&] {
        const auto& shpi = config.algorithm.shpi;
        improve::save_policy(outdir / ("policy_" + algo + ".txt"), result.policy,
                             {shpi.k, config.dataset.gamma, improve::to_string(shpi.bonus_mode),
                              result.metrics.size(), algo});
        improve::write_metrics(outdir / ("metrics_" + algo + ".csv"), result.metrics);
        return 0;
      });
      summary << "iterations " << algo << ' ' << result.metrics.size() << "\n";
    }
    summary << "result " << algo << " mean " << format_double(row.report.mean) << " std "
            << format_double(row.report.std) << "\n";
    rows.push_back(std::move(row));
  }
  run_stage("write", [&] {
    write_text(outdir / "comparison.csv", comparison_csv(rows));
    write_text(outdir / "summary.txt", summary.str());
    return 0;
  });
  return rows;
}

std::vector<AblationRow> ablate_k(const ExperimentConfig& config, const std::filesystem::path& outdir) {
  config.validate();
  std::filesystem::create_directories(outdir);
  auto env = run_stage("environment", [&] { return make_environment(config.environment); });
  const improve::GreedyPolicy behavior = behavior_stage(config, *env);
  const improve::GreedyPolicy logging = corrupt_policy(behavior, config.logging.epsilon);
  const Dataset dataset = collect_stage(config, *env, logging);
  const ValueStageResult value = value_stage(config, dataset);
  const improve::ShpiResult learned =
      train_stage(config, "shpi-offline", value.training, value.value, *env, logging);

  const std::vector<advantages::MseRow> mse = run_stage("mse-advantage", [&] {
    advantages::MseOptions options;
    options.k_list = config.ablation.k;
    options.truth = config.ablation.truth;
    options.n_probes = config.ablation.probes;
    options.n_truth_rollouts = config.ablation.truth_rollouts;
    options.clip = config.algorithm.shpi.clip;
    options.bonus_weight = config.algorithm.shpi.bonus_weight;
    options.hidden = config.algorithm.shpi.hidden;
    options.train = config.algorithm.shpi.regression;
    options.seed = derive_seed(config.seed, "mse-advantage");
    const Policy& pi = config.ablation.policy == "behavior" ? static_cast<const Policy&>(behavior)
                                                            : static_cast<const Policy&>(learned.policy);
    return advantages::advantage_mse_diagnostic(*env, value.training, logging, pi, value.value, options);
  });
  advantages::write_mse_table(outdir / "mse.csv", mse);

  const MetricMode mode = metric_for(config);
  const auto seeds = evaluation_seeds(config);
  std::vector<AblationRow> rows;
  std::ostringstream csv;
  csv << "k,mse,stderr,mean_return,std_return\n";
  for (std::size_t i = 0; i < config.ablation.k.size(); ++i) {
    ExperimentConfig variant = config;
    variant.algorithm.shpi.k = config.ablation.k[i];
    AblationRow row;
    row.k = config.ablation.k[i];
    row.mse = mse[i];
    const improve::ShpiResult result =
        train_stage(variant, "shpi-offline", value.training, value.value, *env, logging);
    row.report = run_stage("evaluate", [&] { return evaluate(*env, result.policy, config.evaluation.rollouts, mode, seeds); });
    csv << row.k << ',' << format_double(row.mse.mse) << ',' << format_double(row.mse.stderr_) << ','
        << format_double(row.report.mean) << ',' << format_double(row.report.std) << '\n';
    rows.push_back(std::move(row));
  }
  write_text(outdir / "ablation.csv", csv.str());
  return rows;
}

}  // namespace shpi::harness
