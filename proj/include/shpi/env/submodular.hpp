#pragma once

#include <span>
#include <vector>

#include "shpi/core/rng.hpp"
#include "shpi/env/environment.hpp"

namespace shpi::env {

/// Running coordinatewise maximum over clicked item embeddings. The maximum
/// over the empty set is the zero vector, so value() starts at 0.
class ClickedMax {
 public:
  explicit ClickedMax(std::size_t dim) : max_(dim, 0.0) {}

  void add(std::span<const double> embedding);
  /// omega . max
  double value(std::span<const double> omega) const;
  const std::vector<double>& max() const { return max_; }

 private:
  std::vector<double> max_;
};

struct SubmodEnvConfig {
  std::size_t n_items = 100;
  std::size_t embed_dim = 100;
  std::vector<double> affinity;  ///< omega; empty draws Uniform[0,1] entries from the seed
  double temperature = 1.0;
  double click_offset = -1.0;
  std::size_t horizon = 200;
  std::uint64_t seed = 0;  ///< item embeddings and default affinity

  void validate() const;
};

/// Recommendation stand-in with a monotone submodular long-term reward: a click
/// on item a is drawn from a logistic model of user-item affinity, and the
/// per-step reward is the increment of omega . max(clicked embeddings).
/// Context = [user embedding, running max] (2 * embed_dim entries).
class SubmodularEnv final : public Environment {
 public:
  explicit SubmodularEnv(SubmodEnvConfig config);

  Context reset(std::uint64_t seed) override;
  EnvStep step(std::size_t action) override;

  std::size_t action_count() const override { return config_.n_items; }
  std::size_t context_dim() const override { return 2 * config_.embed_dim; }
  std::size_t horizon() const override { return config_.horizon; }
  std::size_t time() const override { return time_; }
  const Context& context() const override { return context_; }

  std::unique_ptr<Environment> clone() const override { return std::make_unique<SubmodularEnv>(*this); }
  void reseed(std::uint64_t seed) override { rng_.seed(seed); }

  double click_probability(std::size_t item) const;
  double long_term_value() const { return clicked_.value(config_.affinity); }
  const std::vector<double>& embedding(std::size_t item) const { return embeddings_.at(item); }
  const std::vector<double>& affinity() const { return config_.affinity; }
  bool last_clicked() const { return last_clicked_; }

 private:
  void refresh_context();

  SubmodEnvConfig config_;
  std::vector<std::vector<double>> embeddings_;
  std::vector<double> user_;
  ClickedMax clicked_;
  Context context_;
  std::size_t time_ = 0;
  bool started_ = false;
  bool last_clicked_ = false;
  Rng rng_;
};

}  // namespace shpi::env
