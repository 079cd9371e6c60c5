#include <stdexcept>

#include "ecglite/error.hpp"
#include "ecglite/kernels.hpp"
#include "kernels_rows.hpp"

namespace ecglite::kernels::serial {

template <typename T>
void conv1d_forward(const Conv1dDims& d, std::span<const T> x, std::span<const T> w,
                    std::span<const T> bias, std::span<T> y) {
  rows::check_conv_sizes(d, x.size(), w.size(), bias.size(), y.size());
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t o = 0; o < d.out_channels; ++o) {
      rows::conv1d_forward(d, x.data(), w.data(), bias.data(), y.data(), b, o);
    }
  }
}

template <typename T>
void conv1d_backward_input(const Conv1dDims& d, std::span<const T> dy, std::span<const T> w,
                           std::span<T> dx) {
  rows::check_conv_sizes(d, dx.size(), w.size(), d.out_channels, dy.size());
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t c = 0; c < d.in_channels; ++c) {
      rows::conv1d_backward_input(d, dy.data(), w.data(), dx.data(), b, c);
    }
  }
}

template <typename T>
void conv1d_backward_params(const Conv1dDims& d, std::span<const T> dy, std::span<const T> x,
                            std::span<T> dw, std::span<T> db) {
  rows::check_conv_sizes(d, x.size(), dw.size(), db.size(), dy.size());
  for (std::size_t o = 0; o < d.out_channels; ++o) {
    rows::conv1d_backward_params(d, dy.data(), x.data(), dw.data(), db.data(), o);
  }
}

void median_filter(std::span<const double> x, std::size_t window, std::span<double> y) {
  if (window == 0 || window % 2 == 0) throw ArgumentError("median window must be odd and positive");
  if (y.size() != x.size()) throw ShapeError("median_filter: output size mismatch");
  rows::median_range(x, window, 0, x.size(), y.data());
}

void fir_filter(std::span<const double> x, std::span<const double> taps, std::span<double> y) {
  if (taps.empty() || taps.size() % 2 == 0) throw ArgumentError("FIR length must be odd");
  if (y.size() != x.size()) throw ShapeError("fir_filter: output size mismatch");
  rows::fir_range(x, taps, 0, x.size(), y.data());
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

}  // namespace ecglite::kernels::serial
