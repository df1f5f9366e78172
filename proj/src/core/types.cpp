#include "shpi/core/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace shpi {

std::size_t Dataset::step_count() const {
  std::size_t n = 0;
  for (const auto& traj : trajectories) n += traj.size();
  return n;
}

void Dataset::validate() const {
  if (window_length == 0) throw std::invalid_argument("window length must be positive");
  if (window_step == 0) throw std::invalid_argument("window step must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0,1]");
  if (action_count == 0) throw std::invalid_argument("action count must be positive");
  std::size_t dim = 0;
  bool have_dim = false;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const auto& traj = trajectories[i];
    if (traj.size() != window_length) {
      throw std::invalid_argument("trajectory " + std::to_string(i) + " has length " +
                                  std::to_string(traj.size()) + ", expected " +
                                  std::to_string(window_length));
    }
    for (std::size_t t = 0; t < traj.size(); ++t) {
      const Step& step = traj[t];
      if (step.time_index != traj.source_offset + t) {
        throw std::invalid_argument("non-consecutive time index in trajectory " + std::to_string(i));
      }
      if (!(step.propensity > 0.0) || step.propensity > 1.0) {
        throw std::invalid_argument("propensity must lie in (0,1]");
      }
      if (step.action >= action_count) throw std::invalid_argument("action out of range");
      if (!std::isfinite(step.reward)) throw std::invalid_argument("non-finite reward");
      if (!have_dim) {
        dim = step.context.dim();
        have_dim = true;
      } else if (step.context.dim() != dim) {
        throw std::invalid_argument("context dimension differs across steps");
      }
      for (double v : step.context.features) {
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite context entry");
      }
    }
  }
}

void Dataset::append(const Dataset& other) {
  if (other.window_length != window_length || other.action_count != action_count ||
      other.gamma != gamma) {
    throw std::invalid_argument("cannot append datasets with different metadata");
  }
  trajectories.insert(trajectories.end(), other.trajectories.begin(), other.trajectories.end());
}

Dataset window_stream(std::span<const Step> stream, std::size_t window,
                      std::size_t stride, double gamma,
                      std::size_t action_count, std::size_t stream_id) {
  if (window == 0 || stride == 0) {
    throw std::invalid_argument("window length and step must be positive");
  }
  if (stream.size() < window) throw std::invalid_argument("stream too short");

  Dataset out;
  out.window_length = window;
  out.window_step = stride;
  out.gamma = gamma;
  out.action_count = action_count;
  for (std::size_t offset = 0; offset + window <= stream.size(); offset += stride) {
    Trajectory traj;
    traj.source_offset = stream[offset].time_index;
    traj.stream_id = stream_id;
    traj.steps.assign(stream.begin() + static_cast<std::ptrdiff_t>(offset),
                      stream.begin() + static_cast<std::ptrdiff_t>(offset + window));
    out.trajectories.push_back(std::move(traj));
  }
  return out;
}

}  // namespace shpi
