#include "shpi/env/hiv.hpp"

#include <cmath>
#include <stdexcept>

namespace shpi::env {

HivState hiv_initial_state() { return {163573.0, 5.0, 11945.0, 46.0, 63919.0, 24.0}; }

HivState hiv_derivative(const HivState& x, double eps1, double eps2, const HivParameters& p) {
  const double t1 = x[0], t2 = x[1], t1i = x[2], t2i = x[3], v = x[4], e = x[5];
  const double infected = t1i + t2i;
  HivState dx;
  dx[0] = p.lambda1 - p.d1 * t1 - (1.0 - eps1) * p.k1 * v * t1;
  dx[1] = p.lambda2 - p.d2 * t2 - (1.0 - p.f * eps1) * p.k2 * v * t2;
  dx[2] = (1.0 - eps1) * p.k1 * v * t1 - p.delta * t1i - p.m1 * e * t1i;
  dx[3] = (1.0 - p.f * eps1) * p.k2 * v * t2 - p.delta * t2i - p.m2 * e * t2i;
  dx[4] = (1.0 - eps2) * p.n_t * p.delta * infected - p.c * v -
          ((1.0 - eps1) * p.rho1 * p.k1 * t1 + (1.0 - p.f * eps1) * p.rho2 * p.k2 * t2) * v;
  dx[5] = p.lambda_e + p.b_e * infected / (infected + p.k_b) * e -
          p.d_e * infected / (infected + p.k_d) * e - p.delta_e * e;
  return dx;
}

double hiv_reward(const HivState& x, double eps1, double eps2, const HivParameters& p) {
  return -(p.q_virus * x[4] + p.r1 * eps1 * eps1 + p.r2 * eps2 * eps2 - p.s_immune * x[5]);
}

HivTransition hiv_step(const HivState& state, std::size_t action, const HivEnvConfig& config) {
  if (action > 3) throw std::out_of_range("HIV action must lie in {0,1,2,3}");
  for (double v : state) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite HIV state");
  }
  const HivParameters& p = config.params;
  const double eps1 = (action & 1U) ? p.rti_efficacy : 0.0;
  const double eps2 = (action & 2U) ? p.pi_efficacy : 0.0;
  const double h = config.decision_days / static_cast<double>(config.substeps);

  HivState y = state;
  auto axpy = [](const HivState& base, const HivState& dir, double scale) {
    HivState out;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = base[i] + scale * dir[i];
    return out;
  };
  for (std::size_t i = 0; i < config.substeps; ++i) {
    const HivState k1 = hiv_derivative(y, eps1, eps2, p);
    const HivState k2 = hiv_derivative(axpy(y, k1, 0.5 * h), eps1, eps2, p);
    const HivState k3 = hiv_derivative(axpy(y, k2, 0.5 * h), eps1, eps2, p);
    const HivState k4 = hiv_derivative(axpy(y, k3, h), eps1, eps2, p);
    for (std::size_t j = 0; j < y.size(); ++j) {
      y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
      if (y[j] < 0.0) y[j] = 0.0;
    }
  }
  return {y, hiv_reward(y, eps1, eps2, p)};
}

HivEnv::HivEnv(HivEnvConfig config) : config_(config) {
  if (config_.substeps == 0 || config_.horizon == 0 || !(config_.decision_days > 0.0)) {
    throw std::invalid_argument("invalid HIV env configuration");
  }
  context_ = encode(hiv_initial_state());
}

Context HivEnv::encode(const HivState& state) {
  Context x;
  x.features.resize(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) x.features[i] = std::log10(1.0 + state[i]);
  return x;
}

void HivEnv::set_state(const HivState& state) {
  state_ = state;
  context_ = encode(state_);
}

Context HivEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  state_ = hiv_initial_state();
  if (config_.initial_noise > 0.0) {
    for (double& v : state_) v *= std::exp(config_.initial_noise * standard_normal(rng_));
  }
  time_ = 0;
  started_ = true;
  context_ = encode(state_);
  return context_;
}

EnvStep HivEnv::step(std::size_t action) {
  if (!started_) throw std::logic_error("HIV env stepped before reset");
  if (done()) throw std::logic_error("HIV env stepped after the episode ended");
  HivTransition next = hiv_step(state_, action, config_);
  state_ = next.state;
  context_ = encode(state_);
  ++time_;
  return {context_, next.reward, done()};
}

}  // namespace shpi::env
