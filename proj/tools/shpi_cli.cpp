#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "shpi/core/dataset_io.hpp"
#include "shpi/core/tabular.hpp"
#include "shpi/harness/experiment.hpp"
#include "shpi/improve/baselines.hpp"

using namespace shpi;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k;
  std::optional<double> epsilon;
  std::optional<std::size_t> episodes;
  std::optional<std::size_t> iterations;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config_path, "experiment config (JSON)");
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--k", c.k, "advantage horizon");
  app->add_option("--epsilon", c.epsilon, "logging policy exploration");
  app->add_option("--episodes", c.episodes, "logged episodes");
  app->add_option("--iterations", c.iterations, "policy iterations");
}

harness::ExperimentConfig load(const Common& c) {
  return harness::run_stage("config", [&] {
    harness::ExperimentConfig config = c.config_path.empty() ? harness::ExperimentConfig{}
                                                             : harness::load_config(c.config_path);
    if (c.seed) config.seed = *c.seed;
    if (c.k) config.algorithm.shpi.k = *c.k;
    if (c.epsilon) config.logging.epsilon = *c.epsilon;
    if (c.episodes) config.dataset.episodes = *c.episodes;
    if (c.iterations) config.algorithm.shpi.iterations = *c.iterations;
    config.algorithm.shpi.gamma = config.dataset.gamma;
    config.validate();
    return config;
  });
}

Dataset read_data(const harness::ExperimentConfig& config, const env::Environment& env, const std::string& path) {
  return harness::run_stage("read-dataset", [&] {
    return read_dataset(std::filesystem::path(path), DatasetMeta{config.dataset.gamma, env.action_count(), config.dataset.step});
  });
}

int verify(std::size_t mdps, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "verify"));
  double worst_pdl = 0.0, worst_endpoint = 0.0;
  for (std::size_t i = 0; i < mdps; ++i) {
    const std::size_t states = 2 + uniform_index(rng, 5);
    const std::size_t actions = 2 + uniform_index(rng, 3);
    const std::size_t horizon = 1 + uniform_index(rng, 8);
    const double gamma = 0.5 + 0.5 * uniform01(rng);
    const auto mdp = tabular::random_mdp(states, actions, horizon, gamma, rng);
    const auto mu = tabular::random_policy(states, actions, rng);
    const auto pi = tabular::random_policy(states, actions, rng, horizon);
    for (std::size_t k = 1; k <= horizon; ++k) worst_pdl = std::max(worst_pdl, tabular::pdl_residual(mdp, mu, pi, k));
    const auto q_mu = tabular::dp_q(mdp, mu);
    const auto v_mu = tabular::dp_value(mdp, mu);
    const auto q_pi = tabular::dp_q(mdp, pi);
    const auto one = tabular::dp_k_advantage(mdp, mu, pi, 1);
    const auto full = tabular::dp_k_advantage(mdp, mu, pi, horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      for (std::size_t s = 0; s < states; ++s) {
        for (std::size_t a = 0; a < actions; ++a) {
          worst_endpoint = std::max(worst_endpoint, std::abs(one(t, s, a) - (q_mu(t, s, a) - v_mu(t, s))));
          if (t == 0) worst_endpoint = std::max(worst_endpoint, std::abs(full(t, s, a) - (q_pi(t, s, a) - v_mu(t, s))));
        }
      }
    }
  }
  const bool ok = worst_pdl < 1e-10 && worst_endpoint < 1e-12;
  std::printf("pdl_residual_max %.3e\nendpoint_error_max %.3e\n%s\n", worst_pdl, worst_endpoint, ok ? "ok" : "FAILED");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Short-horizon policy improvement toolkit"};
  app.require_subcommand(1);
  Common common;

  std::string out, dataset_path, value_path, policy_path, behavior_path, metrics_path, algo = "shpi-offline";
  std::optional<std::size_t> rollouts, seeds;
  std::size_t mdps = 50;

  auto* collect = app.add_subcommand("collect", "pretrain the behavior policy and log a dataset");
  add_common(collect, common);
  collect->add_option("-o,--out", out, "dataset file")->required();
  collect->add_option("--behavior", behavior_path, "existing behavior policy (skips pretraining)");
  collect->add_option("--behavior-out", policy_path, "where to save the logging policy");

  auto* fit = app.add_subcommand("fit-value", "fit the termination bonus on a dataset");
  add_common(fit, common);
  fit->add_option("-d,--dataset", dataset_path, "dataset file")->required();
  fit->add_option("-o,--out", out, "value model file")->required();

  auto* train = app.add_subcommand("train", "train a policy on a dataset");
  add_common(train, common);
  train->add_option("-a,--algo", algo, "shpi-online | shpi-offline | cb | session-rl | cpi-full-k")
      ->check(CLI::IsMember({"shpi-online", "shpi-offline", "cb", "session-rl", "cpi-full-k"}));
  train->add_option("-d,--dataset", dataset_path, "dataset file")->required();
  train->add_option("-v,--value", value_path, "value model file (fitted when omitted)");
  train->add_option("--behavior", behavior_path, "logging policy (online training)");
  train->add_option("-o,--out", out, "policy file")->required();
  train->add_option("--metrics", metrics_path, "per-iteration metrics CSV");

  auto* evaluate = app.add_subcommand("evaluate", "evaluate a policy on true rewards");
  add_common(evaluate, common);
  evaluate->add_option("-p,--policy", policy_path, "policy file")->required();
  evaluate->add_option("--rollouts", rollouts, "rollouts per seed");
  evaluate->add_option("--seeds", seeds, "number of seeds");

  auto* ablate = app.add_subcommand("ablate-k", "advantage MSE and return for each k");
  add_common(ablate, common);
  ablate->add_option("-o,--out", out, "output directory")->required();

  auto* mse = app.add_subcommand("mse-advantage", "offline vs online advantage MSE per k");
  add_common(mse, common);
  mse->add_option("-d,--dataset", dataset_path, "dataset file")->required();
  mse->add_option("-v,--value", value_path, "value model file")->required();
  mse->add_option("-p,--policy", policy_path, "target policy file")->required();
  mse->add_option("--behavior", behavior_path, "logging policy file")->required();
  mse->add_option("-o,--out", out, "k,mse,stderr CSV")->required();

  auto* run = app.add_subcommand("run", "full pipeline from a config");
  add_common(run, common);
  run->add_option("-o,--out", out, "output directory")->required();

  auto* ver = app.add_subcommand("verify", "tabular oracle identity suite");
  ver->add_option("--mdps", mdps, "random MDPs to check");
  ver->add_option("--seed", common.seed, "seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ver->parsed()) return verify(mdps, common.seed.value_or(0));

    const harness::ExperimentConfig config = load(common);
    auto env = harness::run_stage("environment", [&] { return harness::make_environment(config.environment); });

    auto logging_policy = [&]() {
      if (!behavior_path.empty()) {
        return harness::run_stage("behavior", [&] { return improve::load_policy(std::filesystem::path(behavior_path)); });
      }
      return harness::corrupt_policy(harness::behavior_stage(config, *env), config.logging.epsilon);
    };

    if (collect->parsed()) {
      const auto logging = logging_policy();
      const Dataset data = harness::collect_stage(config, *env, logging);
      harness::run_stage("write", [&] {
        write_dataset(std::filesystem::path(out), data);
        if (!policy_path.empty()) improve::save_policy(std::filesystem::path(policy_path), logging, {0, config.dataset.gamma, "none", 0, "logging"});
        return 0;
      });
    } else if (fit->parsed()) {
      const Dataset data = read_data(config, *env, dataset_path);
      const auto value = harness::value_stage(config, data);
      harness::run_stage("write", [&] { value.value.save(std::filesystem::path(out)); return 0; });
    } else if (train->parsed()) {
      const Dataset data = read_data(config, *env, dataset_path);
      harness::ValueStageResult value;
      if (value_path.empty()) {
        value = harness::value_stage(config, data);
      } else {
        value.value = harness::run_stage("read-value", [&] { return valuation::ValueModel::load(std::filesystem::path(value_path)); });
        value.training = config.value.backshift ? valuation::apply_backshift(data, value.value) : data;
      }
      improve::GreedyPolicy logging;
      if (algo == "shpi-online") logging = logging_policy();
      const auto result = harness::train_stage(config, algo, value.training, value.value, *env, logging);
      harness::run_stage("write", [&] {
        const auto& shpi = config.algorithm.shpi;
        improve::save_policy(std::filesystem::path(out), result.policy,
                             {shpi.k, config.dataset.gamma, improve::to_string(shpi.bonus_mode), result.metrics.size(), algo});
        if (!metrics_path.empty()) improve::write_metrics(std::filesystem::path(metrics_path), result.metrics);
        return 0;
      });
    } else if (evaluate->parsed()) {
      const auto policy = harness::run_stage("read-policy", [&] { return improve::load_policy(std::filesystem::path(policy_path)); });
      harness::ExperimentConfig c = config;
      if (rollouts) c.evaluation.rollouts = *rollouts;
      if (seeds) c.evaluation.seeds = *seeds;
      const auto report = harness::run_stage("evaluate", [&] {
        return harness::evaluate(*env, policy, c.evaluation.rollouts, harness::metric_for(c), harness::evaluation_seeds(c));
      });
      std::cout << "mean,std\n" << format_double(report.mean) << ',' << format_double(report.std) << '\n';
    } else if (ablate->parsed()) {
      const auto rows = harness::ablate_k(config, out);
      std::cout << "k,mse,stderr,mean_return,std_return\n";
      for (const auto& r : rows) {
        std::cout << r.k << ',' << format_double(r.mse.mse) << ',' << format_double(r.mse.stderr_) << ','
                  << format_double(r.report.mean) << ',' << format_double(r.report.std) << '\n';
      }
    } else if (mse->parsed()) {
      const Dataset data = read_data(config, *env, dataset_path);
      const auto value = harness::run_stage("read-value", [&] { return valuation::ValueModel::load(std::filesystem::path(value_path)); });
      const auto pi = harness::run_stage("read-policy", [&] { return improve::load_policy(std::filesystem::path(policy_path)); });
      const auto mu = harness::run_stage("read-policy", [&] { return improve::load_policy(std::filesystem::path(behavior_path)); });
      const auto rows = harness::run_stage("mse-advantage", [&] {
        advantages::MseOptions options;
        options.k_list = config.ablation.k;
        options.n_probes = config.ablation.probes;
        options.n_truth_rollouts = config.ablation.truth_rollouts;
        options.clip = config.algorithm.shpi.clip;
        options.bonus_weight = config.algorithm.shpi.bonus_weight;
        options.hidden = config.algorithm.shpi.hidden;
        options.train = config.algorithm.shpi.regression;
        options.seed = derive_seed(config.seed, "mse-advantage");
        return advantages::advantage_mse_diagnostic(*env, data, mu, pi, value, options);
      });
      harness::run_stage("write", [&] { advantages::write_mse_table(std::filesystem::path(out), rows); return 0; });
    } else if (run->parsed()) {
      const auto rows = harness::run_experiment(config, out);
      std::cout << "algo,mean,std\n";
      for (const auto& r : rows) {
        std::cout << r.algorithm << ',' << format_double(r.report.mean) << ',' << format_double(r.report.std) << '\n';
      }
    }
  } catch (const harness::StageError& e) {
    std::cerr << "error in stage " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
