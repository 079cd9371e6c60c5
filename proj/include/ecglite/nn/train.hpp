#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ecglite/kernels.hpp"
#include "ecglite/nn/adam.hpp"
#include "ecglite/nn/model.hpp"

namespace ecglite::nn {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  AdamConfig adam;
  std::uint64_t seed = 0;
  std::vector<double> class_weights;  // one per output class; empty = all ones
  kernels::ExecPolicy policy = kernels::ExecPolicy::kSerial;
};

/// Row-major [N, length] samples with one label each.
struct TrainingData {
  std::span<const float> samples;
  std::span<const std::uint8_t> labels;
  std::size_t length = 0;

  std::size_t size() const { return labels.size(); }
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // mean weighted cross-entropy over the epoch
  double weighted_accuracy = 0.0;  // percent, each sample weighted by its class weight
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Shuffled mini-batch Adam training. Shuffling and dropout draw from one
/// generator seeded with config.seed, so a fixed seed reproduces the final
/// weights bit for bit. Throws NumericError on a non-finite loss.
std::vector<EpochRecord> train(Model<float>& model, const TrainingData& data,
                               const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Inference-mode class probabilities, [N, classes]. `samples` is [N, length]
/// with length equal to the model's input length.
Tensor<float> predict(const Model<float>& model, std::span<const float> samples, std::size_t length,
                      kernels::ExecPolicy policy = kernels::ExecPolicy::kSerial,
                      std::size_t batch_size = 256);

std::vector<std::uint8_t> argmax_rows(const Tensor<float>& probs);

}  // namespace ecglite::nn
