#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "ecglite/nn/layers.hpp"

namespace ecglite::nn {

template <typename T>
using Trace = std::vector<LayerCache<T>>;

/// Ordered layer stack producing class logits.
template <typename T>
class Model {
 public:
  Model() = default;
  explicit Model(Shape input_shape) : input_shape_(std::move(input_shape)) {}
  Model(const Model& other);
  Model& operator=(const Model& other);
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  void add(std::unique_ptr<Layer<T>> layer);

  /// Per-sample input shape, e.g. {1, 500}.
  const Shape& input_shape() const { return input_shape_; }
  std::size_t size() const { return layers_.size(); }
  const Layer<T>& layer(std::size_t i) const { return *layers_.at(i); }
  Layer<T>& layer(std::size_t i) { return *layers_.at(i); }

  /// x is [B, input_shape...]. Returns logits. Fills `trace` (one cache per
  /// layer) when given, for a subsequent backward().
  Tensor<T> forward(const Tensor<T>& x, const ForwardContext& ctx, Trace<T>* trace = nullptr) const;

  /// Backpropagates dL/dlogits, accumulating parameter gradients. The input
  /// gradient of the first layer is skipped.
  void backward(const Trace<T>& trace, const Tensor<T>& dlogits,
                kernels::ExecPolicy policy = kernels::ExecPolicy::kSerial);

  void zero_grad();
  std::vector<Parameter<T>*> parameters();
  std::vector<const Parameter<T>*> parameters() const;
  std::size_t parameter_count() const;

  /// Output shape after each layer, starting from input_shape().
  std::vector<Shape> shape_trace() const;

  /// Same architecture and parameters at another precision.
  template <typename U>
  Model<U> cast() const;

 private:
  Shape input_shape_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

inline constexpr std::size_t kInputLength = 500;
inline constexpr std::size_t kOutputClasses = 9;
inline constexpr std::array<std::size_t, 6> kFeatureLengthChain = {451, 216, 207, 99, 95, 46};
inline constexpr std::size_t kArrhythmiaParameterCount = 34361;

/// The three-block CNN + LSTM classifier:
///   3 x [Conv1D, ReLU, MaxPool1D, Dropout(0.1)] with (64,50,20), (32,10,10), (16,5,5),
///   pooling stride 2, then LSTM(32), Dense(32)+ReLU, Dropout(0.1), Dense(16)+ReLU, Dense(9).
/// Softmax is applied by the loss and by predict(). Throws if the feature
/// length chain deviates from kFeatureLengthChain for 500-sample input.
template <typename T>
Model<T> build_arrhythmia_model(std::uint64_t seed, std::size_t input_length = kInputLength);

/// Feature lengths after each convolution and pooling layer (6 values for the
/// canonical stack).
template <typename T>
std::vector<std::size_t> feature_length_chain(const Model<T>& model);

/// True when kinds and hyperparameters match build_arrhythmia_model.
template <typename T>
bool is_arrhythmia_architecture(const Model<T>& model);

}  // namespace ecglite::nn
