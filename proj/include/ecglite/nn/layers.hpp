#pragma once

// Differentiable layers. Every layer maps a batch tensor to a batch tensor;
// the leading dimension is always the batch.
//
// Forward passes are const and keep no state: whatever backward needs is
// written into a caller-owned LayerCache, so one model can serve concurrent
// inference calls while training keeps its own caches.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ecglite/kernels.hpp"
#include "ecglite/nn/tensor.hpp"
#include "ecglite/rng.hpp"

namespace ecglite::nn {

enum class Mode { kTrain, kInfer };

/// Stable ids; they are written into model files.
enum class LayerKind : std::uint32_t {
  kConv1D = 1,
  kReLU = 2,
  kMaxPool1D = 3,
  kDropout = 4,
  kLstm = 5,
  kDense = 6,
};

std::string_view kind_name(LayerKind kind);

template <typename T>
struct Parameter {
  Parameter(std::string name, Shape shape)
      : name(std::move(name)), value(shape), grad(shape), m(shape), v(shape) {}

  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  Tensor<T> m;  // Adam first moment
  Tensor<T> v;  // Adam second moment
};

template <typename T>
struct LayerCache {
  Shape input_shape;
  std::vector<Tensor<T>> tensors;
  std::vector<std::uint32_t> indices;
};

struct ForwardContext {
  Mode mode = Mode::kInfer;
  Rng* rng = nullptr;  // required for dropout in train mode
  kernels::ExecPolicy policy = kernels::ExecPolicy::kSerial;
};

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  /// Per-sample output shape (no batch dimension).
  virtual Shape output_shape(const Shape& input) const = 0;
  /// `cache` may be null when no backward pass will follow.
  virtual Tensor<T> forward(const Tensor<T>& x, const ForwardContext& ctx,
                            LayerCache<T>* cache) const = 0;
  /// Accumulates parameter gradients; returns dL/dx, or an empty tensor
  /// when `need_input_grad` is false.
  virtual Tensor<T> backward(const LayerCache<T>& cache, const Tensor<T>& dy,
                             bool need_input_grad, kernels::ExecPolicy policy) = 0;
  virtual std::vector<std::uint32_t> hyperparameters() const = 0;
  virtual std::unique_ptr<Layer<T>> clone() const = 0;
  virtual void initialize(Rng&) {}

  std::span<Parameter<T>> parameters() { return params_; }
  std::span<const Parameter<T>> parameters() const { return params_; }

 protected:
  std::vector<Parameter<T>> params_;
};

/// Valid (unpadded, stride 1) convolution over [B, C_in, L].
template <typename T>
class Conv1D final : public Layer<T> {
 public:
  Conv1D(std::size_t in_channels, std::size_t filters, std::size_t kernel);

  LayerKind kind() const override { return LayerKind::kConv1D; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& x, const ForwardContext& ctx, LayerCache<T>* cache) const override;
  Tensor<T> backward(const LayerCache<T>& cache, const Tensor<T>& dy, bool need_input_grad,
                     kernels::ExecPolicy policy) override;
  std::vector<std::uint32_t> hyperparameters() const override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Conv1D>(*this); }
  void initialize(Rng& rng) override;

  Tensor<T>& weight() { return this->params_[0].value; }
  Tensor<T>& bias() { return this->params_[1].value; }

 private:
  std::size_t in_channels_, filters_, kernel_;
};

template <typename T>
class ReLU final : public Layer<T> {
 public:
  LayerKind kind() const override { return LayerKind::kReLU; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor<T> forward(const Tensor<T>& x, const ForwardContext& ctx, LayerCache<T>* cache) const override;
  Tensor<T> backward(const LayerCache<T>& cache, const Tensor<T>& dy, bool need_input_grad,
                     kernels::ExecPolicy policy) override;
  std::vector<std::uint32_t> hyperparameters() const override { return {}; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<ReLU>(*this); }
};

/// Max over windows of `pool` with step `stride` along the last axis of
/// [B, C, L]. Ties route the gradient to the first maximum.
template <typename T>
class MaxPool1D final : public Layer<T> {
 public:
  MaxPool1D(std::size_t pool, std::size_t stride);

  LayerKind kind() const override { return LayerKind::kMaxPool1D; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& x, const ForwardContext& ctx, LayerCache<T>* cache) const override;
  Tensor<T> backward(const LayerCache<T>& cache, const Tensor<T>& dy, bool need_input_grad,
                     kernels::ExecPolicy policy) override;
  std::vector<std::uint32_t> hyperparameters() const override {
    return {static_cast<std::uint32_t>(pool_), static_cast<std::uint32_t>(stride_)};
  }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<MaxPool1D>(*this); }

 private:
  std::size_t pool_, stride_;
};

/// Inverted dropout: identity at inference, keep-and-rescale in training.
template <typename T>
class Dropout final : public Layer<T> {
 public:
  explicit Dropout(double rate);

  LayerKind kind() const override { return LayerKind::kDropout; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor<T> forward(const Tensor<T>& x, const ForwardContext& ctx, LayerCache<T>* cache) const override;
  Tensor<T> backward(const LayerCache<T>& cache, const Tensor<T>& dy, bool need_input_grad,
                     kernels::ExecPolicy policy) override;
  std::vector<std::uint32_t> hyperparameters() const override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dropout>(*this); }

  double rate() const { return rate_; }

 private:
  double rate_;
};

/// Single-layer LSTM over [B, F, T] (features by time, as produced by the
/// convolutional stack) returning the last hidden state [B, H].
/// Gate order in every parameter: input, forget, candidate, output.
template <typename T>
class Lstm final : public Layer<T> {
 public:
  Lstm(std::size_t features, std::size_t units);

  LayerKind kind() const override { return LayerKind::kLstm; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& x, const ForwardContext& ctx, LayerCache<T>* cache) const override;
  Tensor<T> backward(const LayerCache<T>& cache, const Tensor<T>& dy, bool need_input_grad,
                     kernels::ExecPolicy policy) override;
  std::vector<std::uint32_t> hyperparameters() const override {
    return {static_cast<std::uint32_t>(features_), static_cast<std::uint32_t>(units_)};
  }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Lstm>(*this); }
  void initialize(Rng& rng) override;

  Tensor<T>& input_weight() { return this->params_[0].value; }      // [4, F, H]
  Tensor<T>& recurrent_weight() { return this->params_[1].value; }  // [4, H, H]
  Tensor<T>& bias() { return this->params_[2].value; }              // [4, H]

 private:
  std::size_t features_, units_;
};

/// Fully connected layer over [B, F_in].
template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(std::size_t inputs, std::size_t units);

  LayerKind kind() const override { return LayerKind::kDense; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& x, const ForwardContext& ctx, LayerCache<T>* cache) const override;
  Tensor<T> backward(const LayerCache<T>& cache, const Tensor<T>& dy, bool need_input_grad,
                     kernels::ExecPolicy policy) override;
  std::vector<std::uint32_t> hyperparameters() const override {
    return {static_cast<std::uint32_t>(inputs_), static_cast<std::uint32_t>(units_)};
  }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dense>(*this); }
  void initialize(Rng& rng) override;

  Tensor<T>& weight() { return this->params_[0].value; }  // [units, inputs]
  Tensor<T>& bias() { return this->params_[1].value; }

 private:
  std::size_t inputs_, units_;
};

/// Rebuilds a layer from its kind and hyperparameters (model files).
template <typename T>
std::unique_ptr<Layer<T>> make_layer(LayerKind kind, std::span<const std::uint32_t> hyper);

}  // namespace ecglite::nn
