#pragma once

#include <cmath>
#include <cstddef>

#include "ecglite/nn/layers.hpp"

namespace ecglite::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update of `p` from its accumulated gradient.
/// `step` counts from 1.
template <typename T>
void adam_step(Parameter<T>& p, std::size_t step, const AdamConfig& cfg) {
  if (step == 0) throw ArgumentError("adam_step: step counts from 1");
  const double t = static_cast<double>(step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  for (std::size_t i = 0; i < p.value.size(); ++i) {
    const T g = p.grad[i];
    p.m[i] = b1 * p.m[i] + (T{1} - b1) * g;
    p.v[i] = b2 * p.v[i] + (T{1} - b2) * g * g;
    const double m_hat = static_cast<double>(p.m[i]) / correction1;
    const double v_hat = static_cast<double>(p.v[i]) / correction2;
    p.value[i] -= static_cast<T>(cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon));
  }
}

}  // namespace ecglite::nn
