// Serial reference vs OpenMP kernels on the shapes the pipeline uses.
// Run: ./build/bench/kernel_bench --benchmark_filter=conv

#include <benchmark/benchmark.h>

#include <vector>

#include "ecglite/kernels.hpp"
#include "ecglite/rng.hpp"

using namespace ecglite;

namespace {

std::vector<float> random_f(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  return v;
}

std::vector<double> random_d(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

// First convolution of the classifier over one training batch.
const kernels::Conv1dDims kFirstConv{128, 1, 500, 64, 50};
// Second convolution.
const kernels::Conv1dDims kSecondConv{128, 64, 216, 32, 10};

template <kernels::ExecPolicy P>
void BM_ConvForward(benchmark::State& state) {
  const auto d = state.range(0) == 0 ? kFirstConv : kSecondConv;
  const auto x = random_f(d.batch * d.in_channels * d.length, 1);
  const auto w = random_f(d.out_channels * d.in_channels * d.kernel, 2);
  const auto b = random_f(d.out_channels, 3);
  std::vector<float> y(d.batch * d.out_channels * d.out_length());
  for (auto _ : state) {
    kernels::conv1d_forward<float>(P, d, x, w, b, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * d.batch));
}

template <kernels::ExecPolicy P>
void BM_ConvBackwardParams(benchmark::State& state) {
  const auto d = state.range(0) == 0 ? kFirstConv : kSecondConv;
  const auto x = random_f(d.batch * d.in_channels * d.length, 1);
  const auto dy = random_f(d.batch * d.out_channels * d.out_length(), 2);
  std::vector<float> dw(d.out_channels * d.in_channels * d.kernel), db(d.out_channels);
  for (auto _ : state) {
    kernels::conv1d_backward_params<float>(P, d, dy, x, dw, db);
    benchmark::DoNotOptimize(dw.data());
  }
}

template <kernels::ExecPolicy P>
void BM_Median(benchmark::State& state) {
  // half an hour at 360 Hz, 600 ms window
  const auto x = random_d(648000, 4);
  std::vector<double> y(x.size());
  for (auto _ : state) {
    kernels::median_filter(P, x, 217, y);
    benchmark::DoNotOptimize(y.data());
  }
}

template <kernels::ExecPolicy P>
void BM_Fir(benchmark::State& state) {
  const auto x = random_d(648000, 5);
  const auto taps = random_d(127, 6);
  std::vector<double> y(x.size());
  for (auto _ : state) {
    kernels::fir_filter(P, x, taps, y);
    benchmark::DoNotOptimize(y.data());
  }
}

}  // namespace

BENCHMARK(BM_ConvForward<kernels::ExecPolicy::kSerial>)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ConvForward<kernels::ExecPolicy::kParallel>)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ConvBackwardParams<kernels::ExecPolicy::kSerial>)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ConvBackwardParams<kernels::ExecPolicy::kParallel>)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Median<kernels::ExecPolicy::kSerial>)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Median<kernels::ExecPolicy::kParallel>)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Fir<kernels::ExecPolicy::kSerial>)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Fir<kernels::ExecPolicy::kParallel>)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
