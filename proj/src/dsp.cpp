#include "ecglite/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ecglite/error.hpp"

namespace ecglite::dsp {

std::vector<double> median_filter(std::span<const double> x, std::size_t window,
                                  kernels::ExecPolicy policy) {
  if (window == 0 || window % 2 == 0) {
    throw ArgumentError("median window must be odd and positive, got " + std::to_string(window));
  }
  std::vector<double> y(x.size());
  if (!x.empty()) kernels::median_filter(policy, x, window, y);
  return y;
}

std::size_t round_to_odd(double samples) {
  const double v = std::max(samples, 1.0);
  return 2 * static_cast<std::size_t>(std::floor(v / 2.0)) + 1;
}

std::pair<std::size_t, std::size_t> baseline_windows(double fs) {
  if (!(fs > 0.0)) throw ArgumentError("sampling rate must be positive");
  return {round_to_odd(0.2 * fs), round_to_odd(0.6 * fs)};
}

std::vector<double> remove_baseline(std::span<const double> x, double fs,
                                    kernels::ExecPolicy policy) {
  const auto [short_w, long_w] = baseline_windows(fs);
  const auto first = median_filter(x, short_w, policy);
  const auto baseline = median_filter(first, long_w, policy);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - baseline[i];
  return out;
}

std::vector<double> lowpass_taps(std::size_t taps, double cutoff) {
  if (taps == 0 || taps % 2 == 0) throw ArgumentError("FIR length must be odd");
  if (!(cutoff > 0.0 && cutoff < 0.5)) throw ArgumentError("cutoff must lie in (0, 0.5)");
  std::vector<double> h(taps);
  const double mid = static_cast<double>(taps / 2);
  double sum = 0.0;
  for (std::size_t i = 0; i < taps; ++i) {
    const double n = static_cast<double>(i) - mid;
    const double sinc = n == 0.0 ? 2.0 * cutoff
                                 : std::sin(2.0 * std::numbers::pi * cutoff * n) / (std::numbers::pi * n);
    const double hamming =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                               static_cast<double>(taps - 1));
    h[i] = sinc * hamming;
    sum += h[i];
  }
  for (double& v : h) v /= sum;
  return h;
}

std::vector<double> resample(std::span<const double> x, double fs_in, double fs_out,
                             kernels::ExecPolicy policy) {
  if (!(fs_in > 0.0) || !(fs_out > 0.0)) throw ArgumentError("sampling rates must be positive");
  if (x.empty()) return {};
  if (fs_in == fs_out) return {x.begin(), x.end()};

  std::vector<double> filtered(x.begin(), x.end());
  if (fs_out < fs_in) {
    const auto taps = lowpass_taps(kResampleTaps, kCutoffFraction * fs_out / fs_in);
    kernels::fir_filter(policy, x, taps, filtered);
  }

  const double ratio = fs_in / fs_out;
  const auto n_out = static_cast<std::size_t>(
      std::floor(static_cast<double>(x.size()) * fs_out / fs_in + 1e-9));
  std::vector<double> y(n_out);
  const std::size_t last = filtered.size() - 1;
  for (std::size_t k = 0; k < n_out; ++k) {
    const double t = static_cast<double>(k) * ratio;
    const auto i = std::min(static_cast<std::size_t>(t), last);
    const double frac = t - static_cast<double>(i);
    y[k] = i == last ? filtered[last] : filtered[i] + frac * (filtered[i + 1] - filtered[i]);
  }
  return y;
}

std::vector<double> normalize(std::span<const double> x) {
  std::vector<double> y(x.size(), 0.0);
  if (x.empty()) return y;
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (hi == lo) return y;
  const double scale = 2.0 / (hi - lo);
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = std::clamp((x[i] - lo) * scale - 1.0, -1.0, 1.0);
  }
  // Pin endpoints exactly despite rounding.
  y[static_cast<std::size_t>(lo_it - x.begin())] = -1.0;
  y[static_cast<std::size_t>(hi_it - x.begin())] = 1.0;
  return y;
}

}  // namespace ecglite::dsp
