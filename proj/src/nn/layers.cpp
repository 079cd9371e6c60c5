#include "ecglite/nn/layers.hpp"

#include <bit>
#include <cmath>

namespace ecglite::nn {

namespace {

template <typename T>
void glorot_uniform(Tensor<T>& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : t.data()) v = static_cast<T>(rng.uniform(-limit, limit));
}

template <typename T>
T sigmoid(T x) {
  return T{1} / (T{1} + std::exp(-x));
}

void require_rank(const Shape& s, std::size_t rank, std::string_view layer) {
  if (s.size() != rank) {
    throw ShapeError(std::string(layer) + ": expected rank " + std::to_string(rank) + " input, got " +
                     to_string(s));
  }
}

}  // namespace

std::string_view kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv1D: return "Conv1D";
    case LayerKind::kReLU: return "ReLU";
    case LayerKind::kMaxPool1D: return "MaxPool1D";
    case LayerKind::kDropout: return "Dropout";
    case LayerKind::kLstm: return "LSTM";
    case LayerKind::kDense: return "Dense";
  }
  return "?";
}

// ---------------------------------------------------------------- Conv1D

template <typename T>
Conv1D<T>::Conv1D(std::size_t in_channels, std::size_t filters, std::size_t kernel)
    : in_channels_(in_channels), filters_(filters), kernel_(kernel) {
  if (!in_channels || !filters || !kernel) throw ArgumentError("Conv1D: dimensions must be positive");
  this->params_.emplace_back("kernel", Shape{filters, in_channels, kernel});
  this->params_.emplace_back("bias", Shape{filters});
}

template <typename T>
Shape Conv1D<T>::output_shape(const Shape& input) const {
  require_rank(input, 2, "Conv1D");
  if (input[0] != in_channels_) throw ShapeError("Conv1D: channel mismatch");
  if (input[1] < kernel_) {
    throw ShapeError("Conv1D: input length " + std::to_string(input[1]) + " shorter than kernel " +
                     std::to_string(kernel_));
  }
  return {filters_, input[1] - kernel_ + 1};
}

template <typename T>
Tensor<T> Conv1D<T>::forward(const Tensor<T>& x, const ForwardContext& ctx, LayerCache<T>* cache) const {
  require_rank(x.shape(), 3, "Conv1D");
  const Shape out = output_shape({x.dim(1), x.dim(2)});
  const kernels::Conv1dDims d{x.dim(0), in_channels_, x.dim(2), filters_, kernel_};
  Tensor<T> y({x.dim(0), out[0], out[1]});
  kernels::conv1d_forward<T>(ctx.policy, d, x.data(), this->params_[0].value.data(),
                             this->params_[1].value.data(), y.data());
  if (cache) {
    cache->input_shape = x.shape();
    cache->tensors = {x};
  }
  return y;
}

template <typename T>
Tensor<T> Conv1D<T>::backward(const LayerCache<T>& cache, const Tensor<T>& dy, bool need_input_grad,
                              kernels::ExecPolicy policy) {
  const Tensor<T>& x = cache.tensors.at(0);
  const kernels::Conv1dDims d{x.dim(0), in_channels_, x.dim(2), filters_, kernel_};
  kernels::conv1d_backward_params<T>(policy, d, dy.data(), x.data(), this->params_[0].grad.data(),
                                     this->params_[1].grad.data());
  if (!need_input_grad) return {};
  Tensor<T> dx(x.shape());
  kernels::conv1d_backward_input<T>(policy, d, dy.data(), this->params_[0].value.data(), dx.data());
  return dx;
}

template <typename T>
std::vector<std::uint32_t> Conv1D<T>::hyperparameters() const {
  return {static_cast<std::uint32_t>(in_channels_), static_cast<std::uint32_t>(filters_),
          static_cast<std::uint32_t>(kernel_)};
}

template <typename T>
void Conv1D<T>::initialize(Rng& rng) {
  glorot_uniform(this->params_[0].value, in_channels_ * kernel_, filters_ * kernel_, rng);
  this->params_[1].value.fill(T{0});
}

// ---------------------------------------------------------------- ReLU

template <typename T>
Tensor<T> ReLU<T>::forward(const Tensor<T>& x, const ForwardContext&, LayerCache<T>* cache) const {
  Tensor<T> y = x;
  for (auto& v : y.data()) v = v < T{0} ? T{0} : v;  // NaN passes through
  if (cache) {
    cache->input_shape = x.shape();
    cache->tensors = {x};
  }
  return y;
}

template <typename T>
Tensor<T> ReLU<T>::backward(const LayerCache<T>& cache, const Tensor<T>& dy, bool need_input_grad,
                            kernels::ExecPolicy) {
  if (!need_input_grad) return {};
  const Tensor<T>& x = cache.tensors.at(0);
  Tensor<T> dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!(x[i] > T{0})) dx[i] = T{0};
  }
  return dx;
}

// ---------------------------------------------------------------- MaxPool1D

template <typename T>
MaxPool1D<T>::MaxPool1D(std::size_t pool, std::size_t stride) : pool_(pool), stride_(stride) {
  if (!pool || !stride) throw ArgumentError("MaxPool1D: pool and stride must be positive");
}

template <typename T>
Shape MaxPool1D<T>::output_shape(const Shape& input) const {
  require_rank(input, 2, "MaxPool1D");
  if (input[1] < pool_) {
    throw ShapeError("MaxPool1D: input length " + std::to_string(input[1]) + " shorter than pool " +
                     std::to_string(pool_));
  }
  return {input[0], (input[1] - pool_) / stride_ + 1};
}

template <typename T>
Tensor<T> MaxPool1D<T>::forward(const Tensor<T>& x, const ForwardContext&, LayerCache<T>* cache) const {
  require_rank(x.shape(), 3, "MaxPool1D");
  const std::size_t batch = x.dim(0), channels = x.dim(1), len = x.dim(2);
  const std::size_t out_len = output_shape({channels, len})[1];
  Tensor<T> y({batch, channels, out_len});
  std::vector<std::uint32_t> argmax;
  if (cache) argmax.resize(y.size());
  for (std::size_t r = 0; r < batch * channels; ++r) {
    const T* xr = x.ptr() + r * len;
    T* yr = y.ptr() + r * out_len;
    for (std::size_t t = 0; t < out_len; ++t) {
      const std::size_t start = t * stride_;
      std::size_t best = start;
      for (std::size_t j = start + 1; j < start + pool_; ++j) {
        if (xr[j] > xr[best]) best = j;
      }
      yr[t] = xr[best];
      if (cache) argmax[r * out_len + t] = static_cast<std::uint32_t>(r * len + best);
    }
  }
  if (cache) {
    cache->input_shape = x.shape();
    cache->indices = std::move(argmax);
  }
  return y;
}

template <typename T>
Tensor<T> MaxPool1D<T>::backward(const LayerCache<T>& cache, const Tensor<T>& dy, bool need_input_grad,
                                 kernels::ExecPolicy) {
  if (!need_input_grad) return {};
  Tensor<T> dx(cache.input_shape);
  for (std::size_t i = 0; i < dy.size(); ++i) dx[cache.indices[i]] += dy[i];
  return dx;
}

// ---------------------------------------------------------------- Dropout

template <typename T>
Dropout<T>::Dropout(double rate) : rate_(rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ArgumentError("Dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  }
}

template <typename T>
Tensor<T> Dropout<T>::forward(const Tensor<T>& x, const ForwardContext& ctx, LayerCache<T>* cache) const {
  if (cache) {
    cache->input_shape = x.shape();
    cache->tensors.clear();
  }
  if (ctx.mode == Mode::kInfer || rate_ == 0.0) return x;
  if (!ctx.rng) throw ArgumentError("Dropout: training mode needs a random generator");

  const T scale = static_cast<T>(1.0 / (1.0 - rate_));
  Tensor<T> mask(x.shape());
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask[i] = ctx.rng->uniform() >= rate_ ? scale : T{0};
    y[i] = x[i] * mask[i];
  }
  if (cache) cache->tensors = {std::move(mask)};
  return y;
}

template <typename T>
Tensor<T> Dropout<T>::backward(const LayerCache<T>& cache, const Tensor<T>& dy, bool need_input_grad,
                               kernels::ExecPolicy) {
  if (!need_input_grad) return {};
  if (cache.tensors.empty()) return dy;
  const Tensor<T>& mask = cache.tensors[0];
  Tensor<T> dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= mask[i];
  return dx;
}

template <typename T>
std::vector<std::uint32_t> Dropout<T>::hyperparameters() const {
  return {std::bit_cast<std::uint32_t>(static_cast<float>(rate_))};
}

// ---------------------------------------------------------------- LSTM

template <typename T>
Lstm<T>::Lstm(std::size_t features, std::size_t units) : features_(features), units_(units) {
  if (!features || !units) throw ArgumentError("LSTM: dimensions must be positive");
  this->params_.emplace_back("input_kernel", Shape{4, features, units});
  this->params_.emplace_back("recurrent_kernel", Shape{4, units, units});
  this->params_.emplace_back("bias", Shape{4, units});
}

template <typename T>
Shape Lstm<T>::output_shape(const Shape& input) const {
  require_rank(input, 2, "LSTM");
  if (input[0] != features_) throw ShapeError("LSTM: feature mismatch");
  if (input[1] < 1) throw ShapeError("LSTM: needs at least one timestep");
  return {units_};
}

template <typename T>
void Lstm<T>::initialize(Rng& rng) {
  glorot_uniform(this->params_[0].value, features_, 4 * units_, rng);
  glorot_uniform(this->params_[1].value, units_, 4 * units_, rng);
  auto& b = this->params_[2].value;
  b.fill(T{0});
  for (std::size_t h = 0; h < units_; ++h) b[units_ + h] = T{1};  // forget gate
}

template <typename T>
Tensor<T> Lstm<T>::forward(const Tensor<T>& x, const ForwardContext&, LayerCache<T>* cache) const {
  require_rank(x.shape(), 3, "LSTM");
  output_shape({x.dim(1), x.dim(2)});
  const std::size_t batch = x.dim(0), F = features_, T_ = x.dim(2), H = units_;
  const T* W = this->params_[0].value.ptr();
  const T* U = this->params_[1].value.ptr();
  const T* bias = this->params_[2].value.ptr();

  Tensor<T> y({batch, H});
  Tensor<T> gates, cells, hidden;
  if (cache) {
    gates = Tensor<T>({batch, T_, 4 * H});
    cells = Tensor<T>({batch, T_ + 1, H});
    hidden = Tensor<T>({batch, T_ + 1, H});
  }
  std::vector<T> a(4 * H), h(H), c(H);
  for (std::size_t b = 0; b < batch; ++b) {
    std::fill(h.begin(), h.end(), T{0});
    std::fill(c.begin(), c.end(), T{0});
    const T* xb = x.ptr() + b * F * T_;
    for (std::size_t t = 0; t < T_; ++t) {
      std::copy(bias, bias + 4 * H, a.begin());
      for (std::size_t f = 0; f < F; ++f) {
        const T xv = xb[f * T_ + t];
        for (std::size_t q = 0; q < 4; ++q) {
          const T* wr = W + (q * F + f) * H;
          T* ar = a.data() + q * H;
          for (std::size_t k = 0; k < H; ++k) ar[k] += xv * wr[k];
        }
      }
      for (std::size_t j = 0; j < H; ++j) {
        const T hv = h[j];
        for (std::size_t q = 0; q < 4; ++q) {
          const T* ur = U + (q * H + j) * H;
          T* ar = a.data() + q * H;
          for (std::size_t k = 0; k < H; ++k) ar[k] += hv * ur[k];
        }
      }
      for (std::size_t k = 0; k < H; ++k) {
        const T ig = sigmoid(a[k]);
        const T fg = sigmoid(a[H + k]);
        const T gg = std::tanh(a[2 * H + k]);
        const T og = sigmoid(a[3 * H + k]);
        c[k] = fg * c[k] + ig * gg;
        h[k] = og * std::tanh(c[k]);
        a[k] = ig;
        a[H + k] = fg;
        a[2 * H + k] = gg;
        a[3 * H + k] = og;
      }
      if (cache) {
        std::copy(a.begin(), a.end(), gates.ptr() + (b * T_ + t) * 4 * H);
        std::copy(c.begin(), c.end(), cells.ptr() + (b * (T_ + 1) + t + 1) * H);
        std::copy(h.begin(), h.end(), hidden.ptr() + (b * (T_ + 1) + t + 1) * H);
      }
    }
    std::copy(h.begin(), h.end(), y.ptr() + b * H);
  }
  if (cache) {
    cache->input_shape = x.shape();
    cache->tensors = {x, std::move(gates), std::move(cells), std::move(hidden)};
  }
  return y;
}

template <typename T>
Tensor<T> Lstm<T>::backward(const LayerCache<T>& cache, const Tensor<T>& dy, bool need_input_grad,
                            kernels::ExecPolicy) {
  const Tensor<T>& x = cache.tensors.at(0);
  const Tensor<T>& gates = cache.tensors.at(1);
  const Tensor<T>& cells = cache.tensors.at(2);
  const Tensor<T>& hidden = cache.tensors.at(3);
  const std::size_t batch = x.dim(0), F = features_, T_ = x.dim(2), H = units_;
  const T* W = this->params_[0].value.ptr();
  const T* U = this->params_[1].value.ptr();
  T* dW = this->params_[0].grad.ptr();
  T* dU = this->params_[1].grad.ptr();
  T* db = this->params_[2].grad.ptr();

  Tensor<T> dx;
  if (need_input_grad) dx = Tensor<T>(x.shape());
  std::vector<T> dh(H), dc(H), dh_prev(H), da(4 * H);
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy(dy.ptr() + b * H, dy.ptr() + (b + 1) * H, dh.begin());
    std::fill(dc.begin(), dc.end(), T{0});
    const T* xb = x.ptr() + b * F * T_;
    for (std::size_t step = T_; step-- > 0;) {
      const T* g = gates.ptr() + (b * T_ + step) * 4 * H;
      const T* c_t = cells.ptr() + (b * (T_ + 1) + step + 1) * H;
      const T* c_prev = cells.ptr() + (b * (T_ + 1) + step) * H;
      const T* h_prev = hidden.ptr() + (b * (T_ + 1) + step) * H;
      for (std::size_t k = 0; k < H; ++k) {
        const T ig = g[k], fg = g[H + k], gg = g[2 * H + k], og = g[3 * H + k];
        const T tc = std::tanh(c_t[k]);
        const T d_o = dh[k] * tc;
        dc[k] += dh[k] * og * (T{1} - tc * tc);
        da[k] = dc[k] * gg * ig * (T{1} - ig);
        da[H + k] = dc[k] * c_prev[k] * fg * (T{1} - fg);
        da[2 * H + k] = dc[k] * ig * (T{1} - gg * gg);
        da[3 * H + k] = d_o * og * (T{1} - og);
        dc[k] *= fg;
      }
      for (std::size_t i = 0; i < 4 * H; ++i) db[i] += da[i];
      for (std::size_t f = 0; f < F; ++f) {
        const T xv = xb[f * T_ + step];
        T acc = 0;
        for (std::size_t q = 0; q < 4; ++q) {
          const T* wr = W + (q * F + f) * H;
          T* dwr = dW + (q * F + f) * H;
          const T* dar = da.data() + q * H;
          for (std::size_t k = 0; k < H; ++k) {
            dwr[k] += xv * dar[k];
            acc += wr[k] * dar[k];
          }
        }
        if (need_input_grad) dx[b * F * T_ + f * T_ + step] = acc;
      }
      for (std::size_t j = 0; j < H; ++j) {
        const T hv = h_prev[j];
        T acc = 0;
        for (std::size_t q = 0; q < 4; ++q) {
          const T* ur = U + (q * H + j) * H;
          T* dur = dU + (q * H + j) * H;
          const T* dar = da.data() + q * H;
          for (std::size_t k = 0; k < H; ++k) {
            dur[k] += hv * dar[k];
            acc += ur[k] * dar[k];
          }
        }
        dh_prev[j] = acc;
      }
      std::swap(dh, dh_prev);
    }
  }
  return dx;
}

// ---------------------------------------------------------------- Dense

template <typename T>
Dense<T>::Dense(std::size_t inputs, std::size_t units) : inputs_(inputs), units_(units) {
  if (!inputs || !units) throw ArgumentError("Dense: dimensions must be positive");
  this->params_.emplace_back("kernel", Shape{units, inputs});
  this->params_.emplace_back("bias", Shape{units});
}

template <typename T>
Shape Dense<T>::output_shape(const Shape& input) const {
  require_rank(input, 1, "Dense");
  if (input[0] != inputs_) {
    throw ShapeError("Dense: expected " + std::to_string(inputs_) + " inputs, got " +
                     std::to_string(input[0]));
  }
  return {units_};
}

template <typename T>
void Dense<T>::initialize(Rng& rng) {
  glorot_uniform(this->params_[0].value, inputs_, units_, rng);
  this->params_[1].value.fill(T{0});
}

template <typename T>
Tensor<T> Dense<T>::forward(const Tensor<T>& x, const ForwardContext&, LayerCache<T>* cache) const {
  require_rank(x.shape(), 2, "Dense");
  output_shape({x.dim(1)});
  const std::size_t batch = x.dim(0);
  const T* W = this->params_[0].value.ptr();
  const T* bias = this->params_[1].value.ptr();
  Tensor<T> y({batch, units_});
  for (std::size_t b = 0; b < batch; ++b) {
    const T* xb = x.ptr() + b * inputs_;
    for (std::size_t o = 0; o < units_; ++o) {
      const T* wr = W + o * inputs_;
      T acc = bias[o];
      for (std::size_t i = 0; i < inputs_; ++i) acc += wr[i] * xb[i];
      y[b * units_ + o] = acc;
    }
  }
  if (cache) {
    cache->input_shape = x.shape();
    cache->tensors = {x};
  }
  return y;
}

template <typename T>
Tensor<T> Dense<T>::backward(const LayerCache<T>& cache, const Tensor<T>& dy, bool need_input_grad,
                             kernels::ExecPolicy) {
  const Tensor<T>& x = cache.tensors.at(0);
  const std::size_t batch = x.dim(0);
  const T* W = this->params_[0].value.ptr();
  T* dW = this->params_[0].grad.ptr();
  T* db = this->params_[1].grad.ptr();
  Tensor<T> dx;
  if (need_input_grad) dx = Tensor<T>(x.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    const T* xb = x.ptr() + b * inputs_;
    for (std::size_t o = 0; o < units_; ++o) {
      const T g = dy[b * units_ + o];
      db[o] += g;
      T* dwr = dW + o * inputs_;
      for (std::size_t i = 0; i < inputs_; ++i) dwr[i] += g * xb[i];
      if (need_input_grad) {
        const T* wr = W + o * inputs_;
        T* dxb = dx.ptr() + b * inputs_;
        for (std::size_t i = 0; i < inputs_; ++i) dxb[i] += g * wr[i];
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------- factory

template <typename T>
std::unique_ptr<Layer<T>> make_layer(LayerKind kind, std::span<const std::uint32_t> hp) {
  auto need = [&](std::size_t n) {
    if (hp.size() != n) {
      throw ArgumentError(std::string(kind_name(kind)) + ": expected " + std::to_string(n) +
                          " hyperparameters, got " + std::to_string(hp.size()));
    }
  };
  switch (kind) {
    case LayerKind::kConv1D:
      need(3);
      return std::make_unique<Conv1D<T>>(hp[0], hp[1], hp[2]);
    case LayerKind::kReLU:
      need(0);
      return std::make_unique<ReLU<T>>();
    case LayerKind::kMaxPool1D:
      need(2);
      return std::make_unique<MaxPool1D<T>>(hp[0], hp[1]);
    case LayerKind::kDropout:
      need(1);
      return std::make_unique<Dropout<T>>(static_cast<double>(std::bit_cast<float>(hp[0])));
    case LayerKind::kLstm:
      need(2);
      return std::make_unique<Lstm<T>>(hp[0], hp[1]);
    case LayerKind::kDense:
      need(2);
      return std::make_unique<Dense<T>>(hp[0], hp[1]);
  }
  throw ArgumentError("unknown layer kind " + std::to_string(static_cast<std::uint32_t>(kind)));
}

template class Conv1D<float>;
template class Conv1D<double>;
template class ReLU<float>;
template class ReLU<double>;
template class MaxPool1D<float>;
template class MaxPool1D<double>;
template class Dropout<float>;
template class Dropout<double>;
template class Lstm<float>;
template class Lstm<double>;
template class Dense<float>;
template class Dense<double>;
template std::unique_ptr<Layer<float>> make_layer<float>(LayerKind, std::span<const std::uint32_t>);
template std::unique_ptr<Layer<double>> make_layer<double>(LayerKind, std::span<const std::uint32_t>);

}  // namespace ecglite::nn
