#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace shpi {

/// Observed context x. The dimension is fixed per environment.
struct Context {
  std::vector<double> features;

  std::size_t dim() const { return features.size(); }
  std::span<const double> view() const { return features; }

  bool operator==(const Context&) const = default;
};

/// One logged interaction (x_t, a_t, mu(a_t|x_t), r_t).
///
/// The propensity is the behavior probability recorded at logging time; it is
/// never recomputed from a policy model afterwards.
struct Step {
  Context context;
  std::size_t action = 0;
  double propensity = 1.0;
  double reward = 0.0;
  std::size_t time_index = 0;

  bool operator==(const Step&) const = default;
};

/// A W-length window cut from one interaction stream.
struct Trajectory {
  std::vector<Step> steps;
  std::size_t source_offset = 0;
  /// Identifier of the originating stream (episode); windows of the same
  /// stream share it.
  std::size_t stream_id = 0;

  std::size_t size() const { return steps.size(); }
  const Step& operator[](std::size_t t) const { return steps[t]; }

  bool operator==(const Trajectory&) const = default;
};

/// The logged batch D.
struct Dataset {
  std::vector<Trajectory> trajectories;
  std::size_t window_length = 1;
  std::size_t window_step = 1;
  double gamma = 0.99;
  std::size_t action_count = 1;

  bool empty() const { return trajectories.empty(); }
  std::size_t step_count() const;

  /// Checks every structural invariant; throws std::invalid_argument.
  void validate() const;

  /// Appends the windows of `other`; metadata must agree.
  void append(const Dataset& other);

  bool operator==(const Dataset&) const = default;
};

/// Cuts a stream into windows of length `window` starting every `stride` steps.
/// Windows keep the stream's time indices. Throws std::invalid_argument with
/// "stream too short" when the stream holds fewer than `window` steps.
Dataset window_stream(std::span<const Step> stream, std::size_t window,
                      std::size_t stride, double gamma,
                      std::size_t action_count, std::size_t stream_id = 0);

}  // namespace shpi
