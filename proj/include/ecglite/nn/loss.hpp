#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include "ecglite/nn/tensor.hpp"

namespace ecglite::nn {

inline constexpr double kProbabilityFloor = 1e-12;

/// Max-shifted softmax over one row.
template <typename T>
void softmax(std::span<const T> z, std::span<T> p) {
  const T zmax = *std::max_element(z.begin(), z.end());
  T sum = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - zmax);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
}

/// Row-wise softmax of [B, K] logits.
template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits) {
  if (logits.rank() != 2) throw ShapeError("softmax_rows: expected [B, K] logits");
  Tensor<T> p(logits.shape());
  const std::size_t k = logits.dim(1);
  for (std::size_t b = 0; b < logits.dim(0); ++b) {
    softmax<T>(logits.data().subspan(b * k, k), p.data().subspan(b * k, k));
  }
  return p;
}

template <typename T>
struct LossOutput {
  T loss = 0;
  Tensor<T> grad_logits;  // [B, K]
  std::size_t clamped = 0;  // rows whose true-class probability hit the floor
};

/// L = (1/B) sum_b w[y_b] * -log p[b, y_b], with the gradient taken through
/// the softmax: dL/dz_b = w[y_b] * (p_b - onehot(y_b)) / B.
template <typename T>
LossOutput<T> weighted_ce_loss(const Tensor<T>& probs, std::span<const std::uint8_t> labels,
                               std::span<const double> weights) {
  if (probs.rank() != 2 || probs.dim(0) != labels.size()) {
    throw ShapeError("weighted_ce_loss: probabilities and labels disagree in batch size");
  }
  const std::size_t batch = probs.dim(0), k = probs.dim(1);
  if (weights.size() != k) throw ShapeError("weighted_ce_loss: need one weight per class");
  LossOutput<T> out;
  out.grad_logits = Tensor<T>(probs.shape());
  const T inv_b = T{1} / static_cast<T>(batch);
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t y = labels[b];
    if (y >= k) throw ArgumentError("weighted_ce_loss: label " + std::to_string(y) + " out of range");
    const T w = static_cast<T>(weights[y]);
    double p_true = static_cast<double>(probs[b * k + y]);
    if (p_true < kProbabilityFloor) {
      p_true = kProbabilityFloor;
      ++out.clamped;
    }
    total += weights[y] * -std::log(p_true);
    for (std::size_t c = 0; c < k; ++c) {
      const T target = c == y ? T{1} : T{0};
      out.grad_logits[b * k + c] = w * (probs[b * k + c] - target) * inv_b;
    }
  }
  out.loss = static_cast<T>(total / static_cast<double>(batch));
  return out;
}

}  // namespace ecglite::nn
