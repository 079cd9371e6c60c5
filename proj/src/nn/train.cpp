#include "ecglite/nn/train.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "ecglite/nn/loss.hpp"

namespace ecglite::nn {

namespace {

Tensor<float> gather_batch(const TrainingData& data, std::span<const std::size_t> rows) {
  Tensor<float> x({rows.size(), 1, data.length});
  for (std::size_t b = 0; b < rows.size(); ++b) {
    const auto src = data.samples.subspan(rows[b] * data.length, data.length);
    std::copy(src.begin(), src.end(), x.ptr() + b * data.length);
  }
  return x;
}

}  // namespace

std::vector<EpochRecord> train(Model<float>& model, const TrainingData& data,
                               const TrainConfig& config, const EpochCallback& on_epoch) {
  if (data.size() == 0) throw ArgumentError("train: empty dataset");
  if (config.epochs == 0 || config.batch_size == 0) {
    throw ArgumentError("train: epochs and batch size must be at least 1");
  }
  if (!(config.adam.learning_rate >= 0.0)) throw ArgumentError("train: negative learning rate");
  if (data.samples.size() != data.size() * data.length) {
    throw ShapeError("train: sample buffer does not match labels and length");
  }
  const std::size_t classes = model.shape_trace().back().back();
  std::vector<double> weights = config.class_weights;
  if (weights.empty()) weights.assign(classes, 1.0);
  if (weights.size() != classes) throw ShapeError("train: class weight count differs from model outputs");

  Rng rng(config.seed);
  const ForwardContext ctx{Mode::kTrain, &rng, config.policy};
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto params = model.parameters();
  std::size_t step = 0;
  Trace<float> trace;
  std::vector<EpochRecord> history;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0, hit_weight = 0.0, total_weight = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      const std::span<const std::size_t> rows(order.data() + start, count);
      const Tensor<float> x = gather_batch(data, rows);
      std::vector<std::uint8_t> labels(count);
      for (std::size_t b = 0; b < count; ++b) labels[b] = data.labels[rows[b]];

      const Tensor<float> logits = model.forward(x, ctx, &trace);
      const Tensor<float> probs = softmax_rows(logits);
      const LossOutput<float> loss = weighted_ce_loss(probs, labels, weights);
      if (!std::isfinite(loss.loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index + 1));
      }
      loss_sum += static_cast<double>(loss.loss) * static_cast<double>(count);
      const auto predicted = argmax_rows(probs);
      for (std::size_t b = 0; b < count; ++b) {
        total_weight += weights[labels[b]];
        if (predicted[b] == labels[b]) hit_weight += weights[labels[b]];
      }

      model.zero_grad();
      model.backward(trace, loss.grad_logits, config.policy);
      ++step;
      for (auto* p : params) adam_step(*p, step, config.adam);
    }
    EpochRecord rec{epoch, loss_sum / static_cast<double>(data.size()),
                    total_weight > 0.0 ? 100.0 * hit_weight / total_weight : 0.0};
    history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return history;
}

Tensor<float> predict(const Model<float>& model, std::span<const float> samples, std::size_t length,
                      kernels::ExecPolicy policy, std::size_t batch_size) {
  const Shape& in = model.input_shape();
  if (in.size() != 2 || in[0] != 1 || in[1] != length) {
    throw ShapeError("predict: model expects segments of length " +
                     std::to_string(in.empty() ? 0 : in.back()) + ", got " + std::to_string(length));
  }
  if (length == 0 || samples.size() % length != 0) {
    throw ShapeError("predict: sample buffer is not a whole number of segments");
  }
  if (batch_size == 0) throw ArgumentError("predict: batch size must be at least 1");
  const std::size_t n = samples.size() / length;
  const std::size_t classes = model.shape_trace().back().back();
  Tensor<float> out({n, classes});
  const ForwardContext ctx{Mode::kInfer, nullptr, policy};
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t count = std::min(batch_size, n - start);
    Tensor<float> x({count, 1, length});
    const auto src = samples.subspan(start * length, count * length);
    std::copy(src.begin(), src.end(), x.ptr());
    const Tensor<float> probs = softmax_rows(model.forward(x, ctx));
    std::copy(probs.data().begin(), probs.data().end(), out.ptr() + start * classes);
  }
  return out;
}

std::vector<std::uint8_t> argmax_rows(const Tensor<float>& probs) {
  const std::size_t n = probs.dim(0), k = probs.dim(1);
  std::vector<std::uint8_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float* row = probs.ptr() + i * k;
    out[i] = static_cast<std::uint8_t>(std::max_element(row, row + k) - row);
  }
  return out;
}

}  // namespace ecglite::nn
