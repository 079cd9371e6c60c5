#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ecglite/dsp.hpp"
#include "ecglite/error.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace ecglite;

namespace {

double rms_error_5hz(double fs_in, double fs_out, std::size_t n_in, std::size_t edge) {
  std::vector<double> x(n_in);
  const double w = 2.0 * std::numbers::pi * 5.0;
  for (std::size_t i = 0; i < n_in; ++i) x[i] = std::sin(w * static_cast<double>(i) / fs_in);
  const auto y = dsp::resample(x, fs_in, fs_out);
  double se = 0.0;
  std::size_t count = 0;
  for (std::size_t k = edge; k + edge < y.size(); ++k) {
    const double e = y[k] - std::sin(w * static_cast<double>(k) / fs_out);
    se += e * e;
    ++count;
  }
  return std::sqrt(se / static_cast<double>(count));
}

}  // namespace

TEST_CASE("median filter matches the sort oracle, with and without ties") {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = testgen::size_in(rng, 1, 400);
    const std::size_t w = 2 * testgen::size_in(rng, 0, 40) + 1;
    const auto x = trial % 2 ? testgen::doubles(rng, n) : testgen::tied_doubles(rng, n, 5);
    CHECK(dsp::median_filter(x, w) == oracle::sort_median(x, w));
  }
}

TEST_CASE("median filter of a monotone sequence is the identity") {
  Rng rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    auto x = testgen::doubles(rng, testgen::size_in(rng, 1, 300));
    std::sort(x.begin(), x.end());
    CHECK(dsp::median_filter(x, 2 * rng.below(30) + 1) == x);
  }
}

TEST_CASE("median window must be odd") {
  const std::vector<double> x = {1, 2, 3};
  CHECK_THROWS_AS(dsp::median_filter(x, 4), ArgumentError);
  CHECK_THROWS_AS(dsp::median_filter(x, 0), ArgumentError);
  CHECK(dsp::median_filter(std::vector<double>{}, 3).empty());
}

TEST_CASE("baseline windows round to odd sample counts") {
  CHECK(dsp::baseline_windows(128) == std::pair<std::size_t, std::size_t>{25, 77});
  CHECK(dsp::baseline_windows(360) == std::pair<std::size_t, std::size_t>{73, 217});
  CHECK(dsp::round_to_odd(72.0) == 73);
  CHECK(dsp::round_to_odd(73.9) == 73);
  CHECK(dsp::round_to_odd(0.2) == 1);
}

TEST_CASE("baseline removal of a constant is exactly zero") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<double> x(testgen::size_in(rng, 1, 2000), rng.uniform(-1e3, 1e3));
    const auto y = dsp::remove_baseline(x, trial % 2 ? 360.0 : 128.0);
    for (double v : y) REQUIRE(v == 0.0);
  }
}

TEST_CASE("baseline removal strips a slow ramp and keeps narrow spikes") {
  const double fs = 360.0;
  std::vector<double> x(3600);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.001 * static_cast<double>(i);
  for (std::size_t i = 100; i < x.size(); i += 300) x[i] += 1.0;
  const auto y = dsp::remove_baseline(x, fs);
  // dropping the spike shifts the window median by one ramp step
  for (std::size_t i = 100; i < x.size(); i += 300) CHECK(std::abs(y[i] - 1.0) <= 0.001 + 1e-12);
  CHECK(std::abs(y[250]) < 1e-9);
}

TEST_CASE("low-pass taps are symmetric with unit DC gain") {
  const auto h = dsp::lowpass_taps(127, 0.45 * 128.0 / 360.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    CHECK(h[i] == doctest::Approx(h[h.size() - 1 - i]));
    sum += h[i];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(dsp::lowpass_taps(126, 0.1), ArgumentError);
  CHECK_THROWS_AS(dsp::lowpass_taps(127, 0.6), ArgumentError);
}

TEST_CASE("resampled length is floor(n * fs_out / fs_in)") {
  Rng rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = testgen::size_in(rng, 1, 5000);
    const double fs_in = trial % 3 == 0 ? 250.0 : 360.0;
    const auto y = dsp::resample(testgen::doubles(rng, n), fs_in, 128.0);
    CHECK(y.size() == static_cast<std::size_t>(std::floor(static_cast<double>(n) * 128.0 / fs_in)));
  }
  CHECK(dsp::resample(std::vector<double>(3600, 0.0), 360.0, 128.0).size() == 1280);
}

TEST_CASE("resampling keeps DC and a 5 Hz tone") {
  const std::vector<double> dc(1000, 0.7);
  for (double v : dsp::resample(dc, 360.0, 128.0)) CHECK(v == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(rms_error_5hz(360.0, 128.0, 3600, 64) < 1e-2);
  CHECK(rms_error_5hz(250.0, 128.0, 2500, 64) < 1e-2);
}

TEST_CASE("normalize to [-1, 1]") {
  Rng rng(25);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = testgen::doubles(rng, testgen::size_in(rng, 2, 500), -50.0, 80.0);
    const auto y = dsp::normalize(x);
    CHECK(*std::min_element(y.begin(), y.end()) == -1.0);
    CHECK(*std::max_element(y.begin(), y.end()) == 1.0);
    // order preserved
    for (std::size_t i = 1; i < x.size(); ++i) {
      if (x[i] > x[i - 1]) CHECK(y[i] >= y[i - 1]);
    }
  }
  for (double v : dsp::normalize(std::vector<double>(10, 3.0))) CHECK(v == 0.0);
  CHECK(dsp::normalize(std::vector<double>{}).empty());
}
