#include "shpi/harness/behavior.hpp"

#include <numeric>
#include <stdexcept>

namespace shpi::harness {

namespace {

struct Transition {
  Context x;
  std::size_t a;
  double r;
  Context next;
  std::size_t next_action;
  bool terminal;
};

}  // namespace

improve::GreedyPolicy pretrain_behavior(const env::Environment& prototype, const SarsaOptions& options,
                                        std::uint64_t seed) {
  if (!(options.gamma >= 0.0 && options.gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
  auto sim = prototype.clone();
  const std::size_t dim = sim->context_dim();
  const std::size_t n_actions = sim->action_count();
  const double reward_scale = sim->reward_scale();
  auto q = options.hidden.empty() ? approx::Regressor::linear(dim, n_actions)
                                  : approx::Regressor::feedforward(dim, n_actions, options.hidden);
  q.initialize(derive_seed(seed, "sarsa-init"));

  {
    Rng rng(derive_seed(seed, "sarsa-warmup"));
    std::vector<Context> seen;
    for (std::size_t e = 0; e < options.warmup_episodes; ++e) {
      sim->reset(derive_seed(derive_seed(seed, "sarsa-warmup-episode"), e));
      while (!sim->done()) {
        seen.push_back(sim->context());
        sim->step(uniform_index(rng, n_actions));
      }
    }
    if (!seen.empty()) {
      std::vector<std::span<const double>> views;
      for (const auto& x : seen) views.push_back(x.view());
      approx::fit_input_transform(q, views);
    }
  }
  if (options.gamma < 1.0) q.output_scale = 1.0 / (1.0 - options.gamma);

  approx::Optimizer optimizer(approx::Method::kAdam, options.learning_rate, q.parameter_count());
  Rng rng(derive_seed(seed, "sarsa-actions"));
  Rng shuffle(derive_seed(seed, "sarsa-shuffle"));
  std::vector<Transition> episode;
  std::vector<Eigen::MatrixXd> acts, next_acts;
  Eigen::VectorXd grad(static_cast<Eigen::Index>(q.parameter_count()));

  auto choose = [&](const Context& x, double eps) {
    if (uniform01(rng) < eps) return uniform_index(rng, n_actions);
    const Eigen::VectorXd s = q.predict(x.view());
    return argmax(std::span<const double>(s.data(), n_actions));
  };

  for (std::size_t e = 0; e < options.episodes; ++e) {
    const double progress =
        options.episodes > 1 ? static_cast<double>(e) / static_cast<double>(options.episodes - 1) : 1.0;
    const double eps = options.epsilon_start + (options.epsilon_end - options.epsilon_start) * progress;
    sim->reset(derive_seed(derive_seed(seed, "sarsa-episode"), e));
    episode.clear();
    Context x = sim->context();
    std::size_t a = choose(x, eps);
    while (true) {
      const env::EnvStep step = sim->step(a);
      Transition tr{x, a, step.reward / reward_scale, step.next_context, 0, step.done};
      if (!step.done) tr.next_action = choose(step.next_context, eps);
      episode.push_back(tr);
      if (step.done) break;
      x = step.next_context;
      a = tr.next_action;
    }

    std::vector<std::size_t> order(episode.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(shuffle, i)]);
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t stop = std::min(order.size(), start + options.batch_size);
      const auto n = static_cast<Eigen::Index>(stop - start);
      Eigen::MatrixXd xs(static_cast<Eigen::Index>(dim), n), next(static_cast<Eigen::Index>(dim), n);
      for (Eigen::Index j = 0; j < n; ++j) {
        const Transition& tr = episode[order[start + static_cast<std::size_t>(j)]];
        for (std::size_t i = 0; i < dim; ++i) {
          xs(static_cast<Eigen::Index>(i), j) = tr.x.features[i];
          next(static_cast<Eigen::Index>(i), j) = tr.next.features[i];
        }
      }
      q.forward(xs, acts);
      q.forward(next, next_acts);
      Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_actions), n);
      for (Eigen::Index j = 0; j < n; ++j) {
        const Transition& tr = episode[order[start + static_cast<std::size_t>(j)]];
        // network space: Q = output_scale * net
        double target = tr.r / q.output_scale;
        if (!tr.terminal) target += options.gamma * next_acts.back()(static_cast<Eigen::Index>(tr.next_action), j);
        const auto head = static_cast<Eigen::Index>(tr.a);
        delta(head, j) = 2.0 * (acts.back()(head, j) - target) / static_cast<double>(n);
      }
      grad.setZero();
      q.backward(acts, std::move(delta), grad);
      optimizer.step(q.parameters(), grad);
    }
  }
  q.output_scale *= reward_scale;
  return improve::GreedyPolicy(std::move(q), 0.0);
}

improve::GreedyPolicy corrupt_policy(const improve::GreedyPolicy& policy, double epsilon) {
  return policy.with_epsilon(epsilon);
}

}  // namespace shpi::harness
