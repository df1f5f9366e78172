#include "shpi/harness/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include <json.hpp>

namespace shpi::harness {

namespace {

using nlohmann::json;

// get<T>() converts silently between number kinds (-1 becomes a huge size_t,
// 2.5 becomes 2), so integral fields are checked first.
template <typename T>
bool representable(const json& node) {
  if constexpr (std::is_same_v<T, bool>) {
    return node.is_boolean();
  } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
    return node.is_number_unsigned();
  } else if constexpr (std::is_integral_v<T>) {
    return node.is_number_integer();
  } else if constexpr (std::is_floating_point_v<T>) {
    return node.is_number();
  } else if constexpr (requires { typename T::value_type; } && !std::is_same_v<T, std::string>) {
    if (!node.is_array()) return false;
    for (const auto& item : node)
      if (!representable<typename T::value_type>(item)) return false;
    return true;
  } else {
    return true;
  }
}

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw std::invalid_argument(label() + " must be an object");
  }

  template <typename T>
  void field(const char* key, T& value) {
    seen_.insert(key);
    auto it = node_.find(key);
    if (it == node_.end()) return;
    if (!representable<T>(*it)) throw std::invalid_argument("config key " + path_ + key + " has the wrong type");
    try {
      value = it->template get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument("config key " + path_ + key + " has the wrong type");
    }
  }

  template <typename F>
  void section(const char* key, F&& body) {
    seen_.insert(key);
    auto it = node_.find(key);
    if (it == node_.end()) return;
    Reader child(*it, path_ + key + ".");
    body(child);
    child.finish();
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) throw std::invalid_argument("unknown config key " + path_ + it.key());
    }
  }

 private:
  std::string label() const { return path_.empty() ? "config" : "config section " + path_; }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

class Writer {
 public:
  explicit Writer(json& node) : node_(node) { node_ = json::object(); }

  template <typename T>
  void field(const char* key, T& value) {
    node_[key] = value;
  }

  template <typename F>
  void section(const char* key, F&& body) {
    Writer child(node_[key]);
    body(child);
  }

 private:
  json& node_;
};

std::string method_name(approx::Method m) { return m == approx::Method::kAdam ? "adam" : "sgd"; }
approx::Method parse_method(const std::string& s) {
  if (s == "adam") return approx::Method::kAdam;
  if (s == "sgd") return approx::Method::kSgd;
  throw std::invalid_argument("unknown optimizer: " + s);
}

template <typename V>
void visit_train(V& v, approx::TrainOptions& t) {
  std::string method = method_name(t.method);
  v.field("optimizer", method);
  v.field("learning_rate", t.learning_rate);
  v.field("epochs", t.epochs);
  v.field("batch_size", t.batch_size);
  v.field("learning_rate_decay", t.learning_rate_decay);
  t.method = parse_method(method);
}

template <typename V>
void visit(V& v, ExperimentConfig& c) {
  v.field("seed", c.seed);
  v.section("environment", [&](auto& e) {
    e.field("name", c.environment.name);
    e.section("synth", [&](auto& s) {
      auto& x = c.environment.synth;
      s.field("dim", x.dim);
      s.field("n_actions", x.n_actions);
      s.field("action_window", x.action_window);
      s.field("context_window", x.context_window);
      s.field("horizon", x.horizon);
      s.field("action_scale", x.action_scale);
      s.field("center_actions", x.center_actions);
      s.field("seed", x.seed);
    });
    e.section("hiv", [&](auto& s) {
      auto& x = c.environment.hiv;
      s.field("decision_days", x.decision_days);
      s.field("substeps", x.substeps);
      s.field("horizon", x.horizon);
      s.field("initial_noise", x.initial_noise);
    });
    e.section("submod", [&](auto& s) {
      auto& x = c.environment.submod;
      s.field("n_items", x.n_items);
      s.field("embed_dim", x.embed_dim);
      s.field("affinity", x.affinity);
      s.field("temperature", x.temperature);
      s.field("click_offset", x.click_offset);
      s.field("horizon", x.horizon);
      s.field("seed", x.seed);
    });
  });
  v.section("logging", [&](auto& s) {
    s.field("epsilon", c.logging.epsilon);
    s.field("policy_file", c.logging.policy_file);
    s.section("sarsa", [&](auto& q) {
      auto& x = c.logging.sarsa;
      q.field("episodes", x.episodes);
      q.field("gamma", x.gamma);
      q.field("epsilon_start", x.epsilon_start);
      q.field("epsilon_end", x.epsilon_end);
      q.field("hidden", x.hidden);
      q.field("learning_rate", x.learning_rate);
      q.field("batch_size", x.batch_size);
      q.field("warmup_episodes", x.warmup_episodes);
    });
  });
  v.section("dataset", [&](auto& s) {
    auto& x = c.dataset;
    s.field("episodes", x.episodes);
    s.field("window", x.window);
    s.field("step", x.step);
    s.field("gamma", x.gamma);
    s.field("bias_mean", x.bias_mean);
    s.field("bias_std", x.bias_std);
    s.field("bias_period", x.bias_period);
  });
  v.section("value", [&](auto& s) {
    auto& x = c.value;
    s.field("hidden", x.hidden);
    s.field("backshift", x.backshift);
    s.field("external_file", x.external_file);
    s.field("residual_gradient", x.fit.residual_gradient);
    s.field("normalize_rewards", x.fit.normalize_rewards);
    visit_train(s, x.fit.train);
  });
  v.section("algorithm", [&](auto& s) {
    auto& x = c.algorithm.shpi;
    s.field("name", c.algorithm.name);
    s.field("k", x.k);
    s.field("iterations", x.iterations);
    std::vector<double> clip;
    if (x.clip) clip = {x.clip->q1, x.clip->q2};
    s.field("clip", clip);
    if (clip.empty()) {
      x.clip.reset();
    } else if (clip.size() == 2) {
      x.clip = advantages::ClipBounds{clip[0], clip[1]};
    } else {
      throw std::invalid_argument("config key algorithm.clip must be [] or [q1, q2]");
    }
    std::string clip_mode = x.clip_mode == advantages::ClipMode::kCumulative ? "cumulative" : "per-factor";
    s.field("clip_mode", clip_mode);
    if (clip_mode == "cumulative") {
      x.clip_mode = advantages::ClipMode::kCumulative;
    } else if (clip_mode == "per-factor") {
      x.clip_mode = advantages::ClipMode::kPerFactor;
    } else {
      throw std::invalid_argument("unknown clip mode: " + clip_mode);
    }
    std::string bonus_weight =
        x.bonus_weight == advantages::BonusWeight::kReachedState ? "reached-state" : "through-bonus";
    s.field("bonus_weight", bonus_weight);
    if (bonus_weight == "reached-state") {
      x.bonus_weight = advantages::BonusWeight::kReachedState;
    } else if (bonus_weight == "through-bonus") {
      x.bonus_weight = advantages::BonusWeight::kThroughBonus;
    } else {
      throw std::invalid_argument("unknown bonus weight: " + bonus_weight);
    }
    std::string bonus_mode = improve::to_string(x.bonus_mode);
    s.field("bonus_mode", bonus_mode);
    x.bonus_mode = improve::parse_bonus_mode(bonus_mode);
    s.field("proximal_lambda", x.proximal_lambda);
    s.field("ratio_states", x.ratio_states);
    s.field("min_effective_size", x.min_effective_size);
    s.field("update_value_each_iter", x.update_value_each_iter);
    s.field("hidden", x.hidden);
    s.field("exploration", x.exploration);
    s.field("online_episodes", x.online_episodes);
    s.field("online_rollouts", x.online_rollouts);
    s.field("probe_size", x.probe_size);
    s.field("stop_at_fixed_point", x.stop_at_fixed_point);
    s.field("state_baseline", x.state_baseline);
    visit_train(s, x.regression);
  });
  v.section("evaluation", [&](auto& s) {
    s.field("rollouts", c.evaluation.rollouts);
    s.field("seeds", c.evaluation.seeds);
    s.field("metric", c.evaluation.metric);
  });
  v.field("compare", c.compare);
  v.section("ablation", [&](auto& s) {
    s.field("k", c.ablation.k);
    s.field("probes", c.ablation.probes);
    s.field("truth_rollouts", c.ablation.truth_rollouts);
    std::string truth = advantages::to_string(c.ablation.truth);
    s.field("truth", truth);
    c.ablation.truth = advantages::parse_mse_truth(truth);
    s.field("policy", c.ablation.policy);
  });
}

}  // namespace

void ExperimentConfig::validate() const {
  static const std::set<std::string> envs{"synth", "hiv", "submod"};
  static const std::set<std::string> algos{"logging", "shpi-online", "shpi-offline", "cb", "session-rl",
                                           "cpi-full-k"};
  if (!envs.count(environment.name)) throw std::invalid_argument("unknown environment: " + environment.name);
  if (!algos.count(algorithm.name) || algorithm.name == "logging") {
    throw std::invalid_argument("unknown algorithm: " + algorithm.name);
  }
  for (const auto& a : compare) {
    if (!algos.count(a)) throw std::invalid_argument("unknown algorithm in compare: " + a);
  }
  if (!(logging.epsilon >= 0.0 && logging.epsilon <= 1.0)) throw std::invalid_argument("logging epsilon must lie in [0, 1]");
  if (dataset.episodes == 0 || dataset.window == 0 || dataset.step == 0) {
    throw std::invalid_argument("dataset episodes, window and step must be positive");
  }
  if (!(dataset.gamma >= 0.0 && dataset.gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
  if (dataset.bias_period == 0) throw std::invalid_argument("bias period must be positive");
  if (evaluation.rollouts == 0 || evaluation.seeds == 0) throw std::invalid_argument("evaluation needs rollouts and seeds");
  if (!evaluation.metric.empty()) parse_metric_mode(evaluation.metric);
  algorithm.shpi.validate();
  if (ablation.policy != "learned" && ablation.policy != "behavior") {
    throw std::invalid_argument("ablation policy must be learned or behavior");
  }
  for (std::size_t k : ablation.k) {
    if (k == 0 || k > dataset.window) throw std::invalid_argument("ablation k must lie in [1, window]");
  }
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig config;
  Reader reader(root, "");
  visit(reader, config);
  reader.finish();
  config.algorithm.shpi.gamma = config.dataset.gamma;
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string dump_config(const ExperimentConfig& config) {
  ExperimentConfig copy = config;
  json root;
  Writer writer(root);
  visit(writer, copy);
  return root.dump(2);
}

std::unique_ptr<env::Environment> make_environment(const EnvironmentSection& section) {
  if (section.name == "synth") return std::make_unique<env::SyntheticEnv>(section.synth);
  if (section.name == "hiv") return std::make_unique<env::HivEnv>(section.hiv);
  if (section.name == "submod") return std::make_unique<env::SubmodularEnv>(section.submod);
  throw std::invalid_argument("unknown environment: " + section.name);
}

MetricMode metric_for(const ExperimentConfig& config) {
  if (!config.evaluation.metric.empty()) return parse_metric_mode(config.evaluation.metric);
  if (config.environment.name == "synth") return MetricMode::kDelta;
  if (config.environment.name == "submod") return MetricMode::kMeanPerStep;
  return MetricMode::kSum;
}

}  // namespace shpi::harness
