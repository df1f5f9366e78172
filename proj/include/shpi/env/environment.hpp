#pragma once

#include <cstdint>
#include <memory>

#include "shpi/core/types.hpp"

namespace shpi::env {

struct EnvStep {
  Context next_context;
  double reward = 0.0;
  bool done = false;
};

/// Episodic simulator. Instances hold mutable rollout state and belong to one
/// worker; clone() snapshots the full state, including the random stream.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual Context reset(std::uint64_t seed) = 0;
  /// Throws std::logic_error once the episode is done.
  virtual EnvStep step(std::size_t action) = 0;

  virtual std::size_t action_count() const = 0;
  virtual std::size_t context_dim() const = 0;
  virtual std::size_t horizon() const = 0;
  /// Number of steps taken in the current episode.
  virtual std::size_t time() const = 0;
  virtual const Context& context() const = 0;

  virtual std::unique_ptr<Environment> clone() const = 0;
  /// Replaces the stochastic stream without touching the state.
  virtual void reseed(std::uint64_t seed) = 0;

  /// Typical reward magnitude, used to condition learners.
  virtual double reward_scale() const { return 1.0; }

  bool done() const { return time() >= horizon(); }
};

}  // namespace shpi::env
