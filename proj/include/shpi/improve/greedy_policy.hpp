#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "shpi/approx/regressor.hpp"
#include "shpi/core/policy.hpp"

namespace shpi::improve {

/// argmax_a f(x, a) over a per-action scorer, mixed with uniform exploration:
/// pi(a|x) = eps / |A| + (1 - eps) [a == argmax]. Ties go to the lowest index.
class GreedyPolicy final : public Policy {
 public:
  GreedyPolicy() = default;
  GreedyPolicy(approx::Regressor scorer, double epsilon = 0.0);

  std::size_t action_count() const override { return scorer_.output_dim(); }
  using Policy::probabilities;
  void probabilities(const Context& x, std::span<double> out) const override;
  double probability(const Context& x, std::size_t action) const override;

  std::size_t greedy_action(const Context& x) const;
  std::size_t greedy_action(std::span<const double> x) const;
  Eigen::VectorXd scores(const Context& x) const { return scorer_.predict(x.view()); }

  const approx::Regressor& scorer() const { return scorer_; }
  double epsilon() const { return epsilon_; }
  GreedyPolicy with_epsilon(double epsilon) const { return GreedyPolicy(scorer_, epsilon); }

  bool operator==(const GreedyPolicy& other) const {
    return scorer_ == other.scorer_ && epsilon_ == other.epsilon_;
  }

 private:
  approx::Regressor scorer_ = approx::Regressor::linear(1, 1);
  double epsilon_ = 0.0;
};

/// Provenance stored next to a serialized policy.
struct PolicyMetadata {
  std::size_t k = 0;
  double gamma = 0.0;
  std::string bonus_mode = "none";
  std::size_t iteration = 0;
  std::string algorithm = "none";

  bool operator==(const PolicyMetadata&) const = default;
};

void save_policy(std::ostream& out, const GreedyPolicy& policy, const PolicyMetadata& meta);
void save_policy(const std::filesystem::path& path, const GreedyPolicy& policy, const PolicyMetadata& meta);
GreedyPolicy load_policy(std::istream& in, PolicyMetadata* meta = nullptr);
GreedyPolicy load_policy(const std::filesystem::path& path, PolicyMetadata* meta = nullptr);

}  // namespace shpi::improve
