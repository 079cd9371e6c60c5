#pragma once

// Baseline-wander removal, anti-aliased resampling and amplitude
// normalization for single ECG channels.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "ecglite/kernels.hpp"

namespace ecglite::dsp {

inline constexpr double kTargetRate = 128.0;
inline constexpr std::size_t kResampleTaps = 127;
inline constexpr double kCutoffFraction = 0.45;  // of the output rate

/// Exact centered median with replicate edge padding. Throws ArgumentError
/// for even or zero windows.
std::vector<double> median_filter(std::span<const double> x, std::size_t window,
                                  kernels::ExecPolicy policy = kernels::ExecPolicy::kSerial);

/// Nearest odd integer to `samples`, ties rounding up (72 -> 73).
std::size_t round_to_odd(double samples);

/// 200 ms and 600 ms median windows at `fs`.
std::pair<std::size_t, std::size_t> baseline_windows(double fs);

/// x minus its two-pass (200 ms then 600 ms) median baseline.
std::vector<double> remove_baseline(std::span<const double> x, double fs,
                                    kernels::ExecPolicy policy = kernels::ExecPolicy::kSerial);

/// Hamming-windowed sinc low-pass normalized to unit DC gain.
/// `cutoff` is in cycles per input sample (0 < cutoff < 0.5).
std::vector<double> lowpass_taps(std::size_t taps, double cutoff);

/// Low-pass (when decimating) then linear interpolation onto k * fs_in / fs_out.
/// Output length is floor(n * fs_out / fs_in).
std::vector<double> resample(std::span<const double> x, double fs_in, double fs_out,
                             kernels::ExecPolicy policy = kernels::ExecPolicy::kSerial);

/// Min-max scaling to [-1, 1]; constant input maps to zeros.
std::vector<double> normalize(std::span<const double> x);

}  // namespace ecglite::dsp
