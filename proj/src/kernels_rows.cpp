#include "kernels_rows.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "ecglite/error.hpp"

namespace ecglite::kernels::rows {

void check_conv_sizes(const Conv1dDims& d, std::size_t x, std::size_t w, std::size_t bias,
                      std::size_t y) {
  if (d.length < d.kernel) {
    throw ShapeError("conv1d: input length " + std::to_string(d.length) +
                     " shorter than kernel " + std::to_string(d.kernel));
  }
  if (x != d.batch * d.in_channels * d.length || w != d.out_channels * d.in_channels * d.kernel ||
      bias != d.out_channels || y != d.batch * d.out_channels * d.out_length()) {
    throw ShapeError("conv1d: buffer sizes do not match dimensions");
  }
}

template <typename T>
void conv1d_forward(const Conv1dDims& d, const T* x, const T* w, const T* bias, T* y,
                    std::size_t b, std::size_t o) {
  const std::size_t out_len = d.out_length();
  T* __restrict yr = y + (b * d.out_channels + o) * out_len;
  std::fill(yr, yr + out_len, bias[o]);
  for (std::size_t c = 0; c < d.in_channels; ++c) {
    const T* xr = x + (b * d.in_channels + c) * d.length;
    const T* wr = w + (o * d.in_channels + c) * d.kernel;
    for (std::size_t k = 0; k < d.kernel; ++k) {
      const T wv = wr[k];
      const T* __restrict xs = xr + k;
      for (std::size_t t = 0; t < out_len; ++t) yr[t] += wv * xs[t];
    }
  }
}

template <typename T>
void conv1d_backward_input(const Conv1dDims& d, const T* dy, const T* w, T* dx, std::size_t b,
                           std::size_t c) {
  const std::size_t out_len = d.out_length();
  T* __restrict dxr = dx + (b * d.in_channels + c) * d.length;
  std::fill(dxr, dxr + d.length, T{0});
  for (std::size_t o = 0; o < d.out_channels; ++o) {
    const T* __restrict dyr = dy + (b * d.out_channels + o) * out_len;
    const T* wr = w + (o * d.in_channels + c) * d.kernel;
    for (std::size_t k = 0; k < d.kernel; ++k) {
      const T wv = wr[k];
      T* __restrict dst = dxr + k;
      for (std::size_t t = 0; t < out_len; ++t) dst[t] += wv * dyr[t];
    }
  }
}

template <typename T>
void conv1d_backward_params(const Conv1dDims& d, const T* dy, const T* x, T* dw, T* db,
                            std::size_t o) {
  const std::size_t out_len = d.out_length();
  for (std::size_t b = 0; b < d.batch; ++b) {
    const T* __restrict dyr = dy + (b * d.out_channels + o) * out_len;
    T bias_acc = 0;
#pragma omp simd reduction(+ : bias_acc)
    for (std::size_t t = 0; t < out_len; ++t) bias_acc += dyr[t];
    db[o] += bias_acc;
    for (std::size_t c = 0; c < d.in_channels; ++c) {
      const T* xr = x + (b * d.in_channels + c) * d.length;
      T* wr = dw + (o * d.in_channels + c) * d.kernel;
      for (std::size_t k = 0; k < d.kernel; ++k) {
        const T* __restrict xs = xr + k;
        T acc = 0;
#pragma omp simd reduction(+ : acc)
        for (std::size_t t = 0; t < out_len; ++t) acc += dyr[t] * xs[t];
        wr[k] += acc;
      }
    }
  }
}

void median_range(std::span<const double> x, std::size_t window, std::size_t begin,
                  std::size_t end, double* y) {
  if (begin >= end) return;
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto half = static_cast<std::ptrdiff_t>(window / 2);
  auto at = [&](std::ptrdiff_t i) { return x[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, n - 1))]; };

  std::vector<double> sorted;
  sorted.reserve(window);
  const auto first = static_cast<std::ptrdiff_t>(begin);
  for (std::ptrdiff_t j = first - half; j <= first + half; ++j) sorted.push_back(at(j));
  std::sort(sorted.begin(), sorted.end());
  y[begin] = sorted[static_cast<std::size_t>(half)];

  for (auto i = first + 1; i < static_cast<std::ptrdiff_t>(end); ++i) {
    const double leaving = at(i - half - 1);
    const double entering = at(i + half);
    if (leaving != entering) {
      sorted.erase(std::lower_bound(sorted.begin(), sorted.end(), leaving));
      sorted.insert(std::upper_bound(sorted.begin(), sorted.end(), entering), entering);
    }
    y[i] = sorted[static_cast<std::size_t>(half)];
  }
}

void fir_range(std::span<const double> x, std::span<const double> taps, std::size_t begin,
               std::size_t end, double* y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto half = static_cast<std::ptrdiff_t>(taps.size() / 2);
  for (std::size_t i = begin; i < end; ++i) {
    const auto base = static_cast<std::ptrdiff_t>(i) - half;
    double acc = 0.0;
    if (base >= 0 && base + static_cast<std::ptrdiff_t>(taps.size()) <= n) {
      const double* xs = x.data() + base;
      for (std::size_t j = 0; j < taps.size(); ++j) acc += taps[j] * xs[j];
    } else {
      for (std::size_t j = 0; j < taps.size(); ++j) {
        const auto idx = std::clamp<std::ptrdiff_t>(base + static_cast<std::ptrdiff_t>(j), 0, n - 1);
        acc += taps[j] * x[static_cast<std::size_t>(idx)];
      }
    }
    y[i] = acc;
  }
}

#define ECGLITE_INSTANTIATE_ROWS(T)                                                            \
  template void conv1d_forward<T>(const Conv1dDims&, const T*, const T*, const T*, T*,        \
                                  std::size_t, std::size_t);                                  \
  template void conv1d_backward_input<T>(const Conv1dDims&, const T*, const T*, T*,           \
                                         std::size_t, std::size_t);                           \
  template void conv1d_backward_params<T>(const Conv1dDims&, const T*, const T*, T*, T*,      \
                                          std::size_t);

ECGLITE_INSTANTIATE_ROWS(float)
ECGLITE_INSTANTIATE_ROWS(double)

}  // namespace ecglite::kernels::rows
