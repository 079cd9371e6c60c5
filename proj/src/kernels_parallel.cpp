#include <omp.h>

#include <algorithm>

#include "ecglite/error.hpp"
#include "ecglite/kernels.hpp"
#include "kernels_rows.hpp"

namespace ecglite::kernels::parallel {

namespace {
// Smallest chunk worth giving a thread its own sliding window.
constexpr std::size_t kMinChunk = 4096;
}  // namespace

template <typename T>
void conv1d_forward(const Conv1dDims& d, std::span<const T> x, std::span<const T> w,
                    std::span<const T> bias, std::span<T> y) {
  rows::check_conv_sizes(d, x.size(), w.size(), bias.size(), y.size());
  const auto rows_total = static_cast<std::ptrdiff_t>(d.batch * d.out_channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows_total; ++r) {
    const auto row = static_cast<std::size_t>(r);
    rows::conv1d_forward(d, x.data(), w.data(), bias.data(), y.data(), row / d.out_channels,
                         row % d.out_channels);
  }
}

template <typename T>
void conv1d_backward_input(const Conv1dDims& d, std::span<const T> dy, std::span<const T> w,
                           std::span<T> dx) {
  rows::check_conv_sizes(d, dx.size(), w.size(), d.out_channels, dy.size());
  const auto rows_total = static_cast<std::ptrdiff_t>(d.batch * d.in_channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows_total; ++r) {
    const auto row = static_cast<std::size_t>(r);
    rows::conv1d_backward_input(d, dy.data(), w.data(), dx.data(), row / d.in_channels,
                                row % d.in_channels);
  }
}

template <typename T>
void conv1d_backward_params(const Conv1dDims& d, std::span<const T> dy, std::span<const T> x,
                            std::span<T> dw, std::span<T> db) {
  rows::check_conv_sizes(d, x.size(), dw.size(), db.size(), dy.size());
  const auto outs = static_cast<std::ptrdiff_t>(d.out_channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t o = 0; o < outs; ++o) {
    rows::conv1d_backward_params(d, dy.data(), x.data(), dw.data(), db.data(),
                                 static_cast<std::size_t>(o));
  }
}

void median_filter(std::span<const double> x, std::size_t window, std::span<double> y) {
  if (window == 0 || window % 2 == 0) throw ArgumentError("median window must be odd and positive");
  if (y.size() != x.size()) throw ShapeError("median_filter: output size mismatch");
  const std::size_t n = x.size();
  const std::size_t threads = static_cast<std::size_t>(std::max(1, omp_get_max_threads()));
  const std::size_t chunks = std::clamp<std::size_t>(n / kMinChunk, 1, threads * 4);
  const std::size_t step = (n + chunks - 1) / chunks;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * step;
    rows::median_range(x, window, begin, std::min(n, begin + step), y.data());
  }
}

void fir_filter(std::span<const double> x, std::span<const double> taps, std::span<double> y) {
  if (taps.empty() || taps.size() % 2 == 0) throw ArgumentError("FIR length must be odd");
  if (y.size() != x.size()) throw ShapeError("fir_filter: output size mismatch");
  const std::size_t n = x.size();
  const std::size_t step = 1024;
  const auto blocks = static_cast<std::ptrdiff_t>((n + step - 1) / step);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t blk = 0; blk < blocks; ++blk) {
    const std::size_t begin = static_cast<std::size_t>(blk) * step;
    rows::fir_range(x, taps, begin, std::min(n, begin + step), y.data());
  }
}

template void conv1d_forward<float>(const Conv1dDims&, std::span<const float>,
                                    std::span<const float>, std::span<const float>,
                                    std::span<float>);
template void conv1d_forward<double>(const Conv1dDims&, std::span<const double>,
                                     std::span<const double>, std::span<const double>,
                                     std::span<double>);
template void conv1d_backward_input<float>(const Conv1dDims&, std::span<const float>,
                                           std::span<const float>, std::span<float>);
template void conv1d_backward_input<double>(const Conv1dDims&, std::span<const double>,
                                            std::span<const double>, std::span<double>);
template void conv1d_backward_params<float>(const Conv1dDims&, std::span<const float>,
                                            std::span<const float>, std::span<float>,
                                            std::span<float>);
template void conv1d_backward_params<double>(const Conv1dDims&, std::span<const double>,
                                             std::span<const double>, std::span<double>,
                                             std::span<double>);

}  // namespace ecglite::kernels::parallel
