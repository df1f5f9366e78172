#include "shpi/core/policy.hpp"

#include <stdexcept>

namespace shpi {

double Policy::probability(const Context& x, std::size_t action) const {
  if (action >= action_count()) throw std::out_of_range("action out of range");
  std::vector<double> probs(action_count());
  probabilities(x, probs);
  return probs[action];
}

std::size_t Policy::sample(const Context& x, Rng& rng) const {
  std::vector<double> probs(action_count());
  probabilities(x, probs);
  const double u = uniform01(rng);
  double cumulative = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    cumulative += probs[a];
    if (u < cumulative) return a;
  }
  // u fell past the rounded total; take the last action with positive mass
  for (std::size_t a = probs.size(); a-- > 0;) {
    if (probs[a] > 0.0) return a;
  }
  return probs.size() - 1;
}

std::vector<double> Policy::probabilities(const Context& x) const {
  std::vector<double> probs(action_count());
  probabilities(x, probs);
  return probs;
}

UniformPolicy::UniformPolicy(std::size_t action_count) : action_count_(action_count) {
  if (action_count == 0) throw std::invalid_argument("uniform policy needs at least one action");
}

void UniformPolicy::probabilities(const Context&, std::span<double> out) const {
  for (double& p : out) p = 1.0 / static_cast<double>(action_count_);
}

double UniformPolicy::probability(const Context&, std::size_t action) const {
  if (action >= action_count_) throw std::out_of_range("action out of range");
  return 1.0 / static_cast<double>(action_count_);
}

std::size_t argmax(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("argmax of empty score vector");
  std::size_t best = 0;
  for (std::size_t a = 1; a < scores.size(); ++a) {
    if (scores[a] > scores[best]) best = a;
  }
  return best;
}

}  // namespace shpi
