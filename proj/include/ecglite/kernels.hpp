#pragma once

// Hot loops, each in a serial reference form and an OpenMP form.
//
// Both forms perform the same floating-point operations in the same order
// for every output element; only the distribution of output elements across
// threads differs. Results are therefore bitwise identical, which the tests
// assert directly.

#include <cstddef>
#include <span>

namespace ecglite::kernels {

enum class ExecPolicy { kSerial, kParallel };

/// Batched valid 1-D cross-correlation. Layouts are row-major:
/// x [batch, in_channels, length], w [out_channels, in_channels, kernel],
/// y [batch, out_channels, out_length()].
struct Conv1dDims {
  std::size_t batch = 1;
  std::size_t in_channels = 1;
  std::size_t length = 0;
  std::size_t out_channels = 1;
  std::size_t kernel = 1;

  std::size_t out_length() const { return length - kernel + 1; }
};

namespace serial {

template <typename T>
void conv1d_forward(const Conv1dDims& d, std::span<const T> x, std::span<const T> w,
                    std::span<const T> bias, std::span<T> y);
/// dx is overwritten.
template <typename T>
void conv1d_backward_input(const Conv1dDims& d, std::span<const T> dy, std::span<const T> w,
                           std::span<T> dx);
/// dw and db are accumulated into.
template <typename T>
void conv1d_backward_params(const Conv1dDims& d, std::span<const T> dy, std::span<const T> x,
                            std::span<T> dw, std::span<T> db);

/// Sliding exact median with replicate padding; window must be odd.
void median_filter(std::span<const double> x, std::size_t window, std::span<double> y);

/// Centered (zero-phase) FIR with replicate padding; taps.size() must be odd.
void fir_filter(std::span<const double> x, std::span<const double> taps, std::span<double> y);

}  // namespace serial

namespace parallel {

template <typename T>
void conv1d_forward(const Conv1dDims& d, std::span<const T> x, std::span<const T> w,
                    std::span<const T> bias, std::span<T> y);
template <typename T>
void conv1d_backward_input(const Conv1dDims& d, std::span<const T> dy, std::span<const T> w,
                           std::span<T> dx);
template <typename T>
void conv1d_backward_params(const Conv1dDims& d, std::span<const T> dy, std::span<const T> x,
                            std::span<T> dw, std::span<T> db);

void median_filter(std::span<const double> x, std::size_t window, std::span<double> y);
void fir_filter(std::span<const double> x, std::span<const double> taps, std::span<double> y);

}  // namespace parallel

template <typename T>
void conv1d_forward(ExecPolicy p, const Conv1dDims& d, std::span<const T> x,
                    std::span<const T> w, std::span<const T> bias, std::span<T> y) {
  p == ExecPolicy::kParallel ? parallel::conv1d_forward(d, x, w, bias, y)
                             : serial::conv1d_forward(d, x, w, bias, y);
}

template <typename T>
void conv1d_backward_input(ExecPolicy p, const Conv1dDims& d, std::span<const T> dy,
                           std::span<const T> w, std::span<T> dx) {
  p == ExecPolicy::kParallel ? parallel::conv1d_backward_input(d, dy, w, dx)
                             : serial::conv1d_backward_input(d, dy, w, dx);
}

template <typename T>
void conv1d_backward_params(ExecPolicy p, const Conv1dDims& d, std::span<const T> dy,
                            std::span<const T> x, std::span<T> dw, std::span<T> db) {
  p == ExecPolicy::kParallel ? parallel::conv1d_backward_params(d, dy, x, dw, db)
                             : serial::conv1d_backward_params(d, dy, x, dw, db);
}

inline void median_filter(ExecPolicy p, std::span<const double> x, std::size_t window,
                          std::span<double> y) {
  p == ExecPolicy::kParallel ? parallel::median_filter(x, window, y)
                             : serial::median_filter(x, window, y);
}

inline void fir_filter(ExecPolicy p, std::span<const double> x, std::span<const double> taps,
                       std::span<double> y) {
  p == ExecPolicy::kParallel ? parallel::fir_filter(x, taps, y) : serial::fir_filter(x, taps, y);
}

}  // namespace ecglite::kernels
