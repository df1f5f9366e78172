#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "shpi/core/rng.hpp"
#include "shpi/core/types.hpp"

namespace shpi {

/// A stochastic policy over a finite action set.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::size_t action_count() const = 0;
  /// Writes pi(.|x) into `out` (size action_count()).
  virtual void probabilities(const Context& x, std::span<double> out) const = 0;

  virtual double probability(const Context& x, std::size_t action) const;
  /// Draws exactly one uniform from `rng` and inverts the CDF.
  virtual std::size_t sample(const Context& x, Rng& rng) const;

  std::vector<double> probabilities(const Context& x) const;
};

class UniformPolicy final : public Policy {
 public:
  explicit UniformPolicy(std::size_t action_count);

  std::size_t action_count() const override { return action_count_; }
  using Policy::probabilities;
  void probabilities(const Context& x, std::span<double> out) const override;
  double probability(const Context& x, std::size_t action) const override;

 private:
  std::size_t action_count_;
};

/// Lowest-index argmax.
std::size_t argmax(std::span<const double> scores);

}  // namespace shpi
