#include "ecglite/nn/model.hpp"

#include <algorithm>

namespace ecglite::nn {

template <typename T>
Model<T>::Model(const Model& other) : input_shape_(other.input_shape_) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

template <typename T>
Model<T>& Model<T>::operator=(const Model& other) {
  if (this != &other) {
    Model copy(other);
    *this = std::move(copy);
  }
  return *this;
}

template <typename T>
void Model<T>::add(std::unique_ptr<Layer<T>> layer) {
  layers_.push_back(std::move(layer));
}

template <typename T>
Tensor<T> Model<T>::forward(const Tensor<T>& x, const ForwardContext& ctx, Trace<T>* trace) const {
  if (x.rank() != input_shape_.size() + 1 ||
      !std::equal(input_shape_.begin(), input_shape_.end(), x.shape().begin() + 1)) {
    throw ShapeError("model expects per-sample shape " + to_string(input_shape_) +
                     ", got batch " + to_string(x.shape()));
  }
  if (trace) trace->assign(layers_.size(), LayerCache<T>{});
  Tensor<T> h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i]->forward(h, ctx, trace ? &(*trace)[i] : nullptr);
  }
  return h;
}

template <typename T>
void Model<T>::backward(const Trace<T>& trace, const Tensor<T>& dlogits, kernels::ExecPolicy policy) {
  if (trace.size() != layers_.size()) throw ArgumentError("backward: trace does not match model");
  Tensor<T> g = dlogits;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    g = layers_[i]->backward(trace[i], g, i > 0, policy);
  }
}

template <typename T>
void Model<T>::zero_grad() {
  for (auto& l : layers_) {
    for (auto& p : l->parameters()) p.grad.fill(T{0});
  }
}

template <typename T>
std::vector<Parameter<T>*> Model<T>::parameters() {
  std::vector<Parameter<T>*> out;
  for (auto& l : layers_) {
    for (auto& p : l->parameters()) out.push_back(&p);
  }
  return out;
}

template <typename T>
std::vector<const Parameter<T>*> Model<T>::parameters() const {
  std::vector<const Parameter<T>*> out;
  for (const auto& l : layers_) {
    for (const auto& p : std::as_const(*l).parameters()) out.push_back(&p);
  }
  return out;
}

template <typename T>
std::size_t Model<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->value.size();
  return n;
}

template <typename T>
std::vector<Shape> Model<T>::shape_trace() const {
  std::vector<Shape> out;
  Shape s = input_shape_;
  for (const auto& l : layers_) {
    s = l->output_shape(s);
    out.push_back(s);
  }
  return out;
}

template <typename T>
template <typename U>
Model<U> Model<T>::cast() const {
  Model<U> out(input_shape_);
  for (const auto& l : layers_) {
    const auto hp = l->hyperparameters();
    auto copy = make_layer<U>(l->kind(), hp);
    auto src = std::as_const(*l).parameters();
    auto dst = copy->parameters();
    for (std::size_t i = 0; i < src.size(); ++i) {
      std::transform(src[i].value.data().begin(), src[i].value.data().end(),
                     dst[i].value.data().begin(), [](T v) { return static_cast<U>(v); });
    }
    out.add(std::move(copy));
  }
  return out;
}

template <typename T>
Model<T> build_arrhythmia_model(std::uint64_t seed, std::size_t input_length) {
  struct Block {
    std::size_t filters, kernel, pool;
  };
  constexpr Block blocks[] = {{64, 50, 20}, {32, 10, 10}, {16, 5, 5}};
  constexpr std::size_t kPoolStride = 2;
  constexpr double kDropout = 0.1;

  Model<T> m(Shape{1, input_length});
  std::size_t channels = 1;
  for (const auto& b : blocks) {
    m.add(std::make_unique<Conv1D<T>>(channels, b.filters, b.kernel));
    m.add(std::make_unique<ReLU<T>>());
    m.add(std::make_unique<MaxPool1D<T>>(b.pool, kPoolStride));
    m.add(std::make_unique<Dropout<T>>(kDropout));
    channels = b.filters;
  }
  m.add(std::make_unique<Lstm<T>>(channels, 32));
  m.add(std::make_unique<Dense<T>>(32, 32));
  m.add(std::make_unique<ReLU<T>>());
  m.add(std::make_unique<Dropout<T>>(kDropout));
  m.add(std::make_unique<Dense<T>>(32, 16));
  m.add(std::make_unique<ReLU<T>>());
  m.add(std::make_unique<Dense<T>>(16, kOutputClasses));

  // Also validates every layer's shape preconditions.
  const auto chain = feature_length_chain(m);
  if (input_length == kInputLength &&
      !std::equal(chain.begin(), chain.end(), kFeatureLengthChain.begin(), kFeatureLengthChain.end())) {
    throw ShapeError("arrhythmia model feature lengths deviate from the expected chain");
  }

  Rng rng(seed);
  for (std::size_t i = 0; i < m.size(); ++i) m.layer(i).initialize(rng);
  return m;
}

template <typename T>
std::vector<std::size_t> feature_length_chain(const Model<T>& model) {
  std::vector<std::size_t> out;
  const auto shapes = model.shape_trace();
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto kind = model.layer(i).kind();
    if (kind == LayerKind::kConv1D || kind == LayerKind::kMaxPool1D) out.push_back(shapes[i].back());
  }
  return out;
}

template <typename T>
bool is_arrhythmia_architecture(const Model<T>& model) {
  const Model<T> ref = build_arrhythmia_model<T>(0);
  if (model.size() != ref.size() || model.input_shape() != ref.input_shape()) return false;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (model.layer(i).kind() != ref.layer(i).kind() ||
        model.layer(i).hyperparameters() != ref.layer(i).hyperparameters()) {
      return false;
    }
  }
  return true;
}

template class Model<float>;
template class Model<double>;
template Model<double> Model<float>::cast<double>() const;
template Model<float> Model<double>::cast<float>() const;
template Model<float> Model<float>::cast<float>() const;
template Model<double> Model<double>::cast<double>() const;
template Model<float> build_arrhythmia_model<float>(std::uint64_t, std::size_t);
template Model<double> build_arrhythmia_model<double>(std::uint64_t, std::size_t);
template std::vector<std::size_t> feature_length_chain<float>(const Model<float>&);
template std::vector<std::size_t> feature_length_chain<double>(const Model<double>&);
template bool is_arrhythmia_architecture<float>(const Model<float>&);
template bool is_arrhythmia_architecture<double>(const Model<double>&);

}  // namespace ecglite::nn
