#pragma once

// Per-output-row bodies shared by the serial and OpenMP kernels. Kept out of
// line in one translation unit so both drivers execute identical code.

#include <cstddef>
#include <span>

#include "ecglite/kernels.hpp"

namespace ecglite::kernels::rows {

template <typename T>
void conv1d_forward(const Conv1dDims& d, const T* x, const T* w, const T* bias, T* y,
                    std::size_t b, std::size_t o);
template <typename T>
void conv1d_backward_input(const Conv1dDims& d, const T* dy, const T* w, T* dx, std::size_t b,
                           std::size_t c);
template <typename T>
void conv1d_backward_params(const Conv1dDims& d, const T* dy, const T* x, T* dw, T* db,
                            std::size_t o);

void median_range(std::span<const double> x, std::size_t window, std::size_t begin,
                  std::size_t end, double* y);
void fir_range(std::span<const double> x, std::span<const double> taps, std::size_t begin,
               std::size_t end, double* y);

void check_conv_sizes(const Conv1dDims& d, std::size_t x, std::size_t w, std::size_t bias,
                      std::size_t y);

}  // namespace ecglite::kernels::rows
