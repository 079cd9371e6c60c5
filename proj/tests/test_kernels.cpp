#include <doctest.h>

#include "ecglite/dsp.hpp"
#include "ecglite/error.hpp"
#include "ecglite/kernels.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace ecglite;
using kernels::Conv1dDims;

namespace {

template <typename T>
std::vector<T> rand_vec(Rng& rng, std::size_t n) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(rng.uniform(-1.0, 1.0));
  return v;
}

Conv1dDims random_dims(Rng& rng) {
  Conv1dDims d;
  d.batch = testgen::size_in(rng, 1, 6);
  d.in_channels = testgen::size_in(rng, 1, 5);
  d.out_channels = testgen::size_in(rng, 1, 7);
  d.kernel = testgen::size_in(rng, 1, 12);
  d.length = d.kernel + testgen::size_in(rng, 0, 40);
  return d;
}

}  // namespace

TEST_CASE("conv forward matches the naive oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = random_dims(rng);
    const auto x = rand_vec<double>(rng, d.batch * d.in_channels * d.length);
    const auto w = rand_vec<double>(rng, d.out_channels * d.in_channels * d.kernel);
    const auto b = rand_vec<double>(rng, d.out_channels);
    std::vector<double> y(d.batch * d.out_channels * d.out_length());
    kernels::serial::conv1d_forward<double>(d, x, w, b, y);
    const std::size_t per_in = d.in_channels * d.length, per_out = d.out_channels * d.out_length();
    for (std::size_t n = 0; n < d.batch; ++n) {
      const std::vector<double> xn(x.begin() + static_cast<long>(n * per_in), x.begin() + static_cast<long>((n + 1) * per_in));
      const auto ref = oracle::conv1d(xn, d.in_channels, d.length, w, d.out_channels, d.kernel, b);
      for (std::size_t i = 0; i < per_out; ++i) CHECK(y[n * per_out + i] == doctest::Approx(ref[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("conv hand example") {
  const Conv1dDims d{1, 1, 5, 1, 2};
  const std::vector<double> x = {1, 2, 3, 4, 5}, w = {1, 1}, b = {0};
  std::vector<double> y(4);
  kernels::serial::conv1d_forward<double>(d, x, w, b, y);
  CHECK(y == std::vector<double>{3, 5, 7, 9});
}

TEST_CASE("conv size errors") {
  const Conv1dDims d{1, 1, 3, 1, 5};
  std::vector<double> x(3), w(5), b(1), y(1);
  CHECK_THROWS_AS(kernels::serial::conv1d_forward<double>(d, x, w, b, y), ShapeError);
}

TEST_CASE("serial and parallel kernels are bitwise identical") {
  Rng rng(32);
  for (int trial = 0; trial < 60; ++trial) {
    const auto d = random_dims(rng);
    const auto x = rand_vec<float>(rng, d.batch * d.in_channels * d.length);
    const auto w = rand_vec<float>(rng, d.out_channels * d.in_channels * d.kernel);
    const auto b = rand_vec<float>(rng, d.out_channels);
    const auto dy = rand_vec<float>(rng, d.batch * d.out_channels * d.out_length());

    std::vector<float> ys(dy.size()), yp(dy.size());
    kernels::serial::conv1d_forward<float>(d, x, w, b, ys);
    kernels::parallel::conv1d_forward<float>(d, x, w, b, yp);
    CHECK(ys == yp);

    std::vector<float> dxs(x.size(), 9.0f), dxp(x.size(), -9.0f);
    kernels::serial::conv1d_backward_input<float>(d, dy, w, dxs);
    kernels::parallel::conv1d_backward_input<float>(d, dy, w, dxp);
    CHECK(dxs == dxp);

    std::vector<float> dws(w.size(), 0.5f), dwp(w.size(), 0.5f), dbs(b.size(), 0.25f), dbp(b.size(), 0.25f);
    kernels::serial::conv1d_backward_params<float>(d, dy, x, dws, dbs);
    kernels::parallel::conv1d_backward_params<float>(d, dy, x, dwp, dbp);
    CHECK(dws == dwp);
    CHECK(dbs == dbp);
  }
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = testgen::doubles(rng, testgen::size_in(rng, 1, 20000));
    const std::size_t w = 2 * rng.below(120) + 1;
    std::vector<double> ms(x.size()), mp(x.size());
    kernels::serial::median_filter(x, w, ms);
    kernels::parallel::median_filter(x, w, mp);
    CHECK(ms == mp);

    const auto taps = testgen::doubles(rng, 2 * rng.below(64) + 1);
    std::vector<double> fs(x.size()), fp(x.size());
    kernels::serial::fir_filter(x, taps, fs);
    kernels::parallel::fir_filter(x, taps, fp);
    CHECK(fs == fp);
  }
}

TEST_CASE("parallel baseline removal and resampling equal the serial results") {
  Rng rng(33);
  const auto x = testgen::doubles(rng, 36000);
  CHECK(dsp::remove_baseline(x, 360.0, kernels::ExecPolicy::kSerial) ==
        dsp::remove_baseline(x, 360.0, kernels::ExecPolicy::kParallel));
  CHECK(dsp::resample(x, 360.0, 128.0, kernels::ExecPolicy::kSerial) ==
        dsp::resample(x, 360.0, 128.0, kernels::ExecPolicy::kParallel));
}

TEST_CASE("fir filter matches a direct replicate-padded sum") {
  Rng rng(34);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = testgen::doubles(rng, testgen::size_in(rng, 1, 300));
    const auto taps = testgen::doubles(rng, 2 * rng.below(20) + 1);
    std::vector<double> y(x.size());
    kernels::serial::fir_filter(x, taps, y);
    const long n = static_cast<long>(x.size()), half = static_cast<long>(taps.size() / 2);
    for (long i = 0; i < n; ++i) {
      double s = 0.0;
      for (long k = 0; k < static_cast<long>(taps.size()); ++k) {
        s += taps[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(std::clamp(i + k - half, 0L, n - 1))];
      }
      CHECK(y[static_cast<std::size_t>(i)] == doctest::Approx(s).epsilon(1e-12));
    }
  }
}
