// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "ecglite/cli/commands.hpp"
#include "ecglite/dsp.hpp"
#include "ecglite/eval.hpp"
#include "ecglite/model_store.hpp"
#include "ecglite/nn/train.hpp"
#include "ecglite/synthetic.hpp"
#include "ecglite/wfdb.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace ecglite;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Verdict {
  bool ok;
  std::string detail;
};

int failures = 0;

void report(int n, const char* what, const std::function<Verdict()>& body) {
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  if (!v.ok) ++failures;
  std::printf("%s criterion %d: %s (%s)\n", v.ok ? "PASS" : "FAIL", n, what, v.detail.c_str());
  std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

template <typename T>
void randomize(nn::Layer<T>& layer, Rng& rng) {
  for (auto& p : layer.parameters()) {
    for (auto& v : p.value.data()) v = static_cast<T>(rng.uniform(-0.5, 0.5));
  }
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "ecglite_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Verdict shape_chain() {
  const auto model = nn::build_arrhythmia_model<float>(1, 500);
  const auto chain = nn::feature_length_chain(model);
  const std::vector<std::size_t> want = {451, 216, 207, 99, 95, 46};
  std::string got;
  for (auto v : chain) got += (got.empty() ? "" : ",") + std::to_string(v);
  return {chain == want, "lengths " + got};
}

Verdict parameter_budget() {
  const auto model = nn::build_arrhythmia_model<float>(1);
  const auto count = model.parameter_count();
  const auto bytes = model_store::save(model, scratch() / "budget.ecgm");
  return {count == 34361 && bytes <= 200000, fmt("%zu parameters, %zu bytes serialized", count, bytes)};
}

Verdict gradients() {
  constexpr int kInstances = 20;
  constexpr double kTol = 1e-4;
  const auto t0 = Clock::now();
  Rng rng(3);
  double worst[6] = {};
  for (int i = 0; i < kInstances; ++i) {
    const std::size_t c = testgen::size_in(rng, 1, 3), o = testgen::size_in(rng, 1, 4),
                      k = testgen::size_in(rng, 1, 5), l = k + testgen::size_in(rng, 0, 8);
    nn::Conv1D<double> conv(c, o, k);
    randomize(conv, rng);
    worst[0] = std::max(worst[0], gradcheck::check_layer(conv, testgen::tensor<double>(rng, {2, c, l}), rng));

    const std::size_t pool = testgen::size_in(rng, 1, 4), stride = testgen::size_in(rng, 1, 3);
    nn::MaxPool1D<double> mp(pool, stride);
    const std::size_t pl = pool + testgen::size_in(rng, 0, 9);
    worst[1] = std::max(worst[1],
                        gradcheck::check_layer(mp, testgen::tensor_distinct<double>(rng, {2, c, pl}, 0.01), rng));

    nn::ReLU<double> relu;
    worst[2] = std::max(worst[2],
                        gradcheck::check_layer(relu, testgen::tensor_off_zero<double>(rng, {3, o, 5}, 0.01), rng));

    const std::size_t in = testgen::size_in(rng, 1, 8), out = testgen::size_in(rng, 1, 6);
    nn::Dense<double> dense(in, out);
    randomize(dense, rng);
    worst[3] = std::max(worst[3], gradcheck::check_layer(dense, testgen::tensor<double>(rng, {3, in}), rng));

    const std::size_t f = testgen::size_in(rng, 1, 4), h = testgen::size_in(rng, 1, 5),
                      steps = testgen::size_in(rng, 1, 7);
    nn::Lstm<double> lstm(f, h);
    randomize(lstm, rng);
    worst[4] = std::max(worst[4], gradcheck::check_layer(lstm, testgen::tensor<double>(rng, {2, f, steps}), rng));

    const std::size_t n = testgen::size_in(rng, 1, 6), classes = testgen::size_in(rng, 2, 9);
    const auto labels = testgen::labels(rng, n, classes);
    const auto w = testgen::doubles(rng, classes, 0.2, 3.0);
    worst[5] = std::max(worst[5],
                        gradcheck::check_softmax_ce(testgen::tensor<double>(rng, {n, classes}, -3, 3), labels, w));
  }
  const double secs = seconds_since(t0);
  const bool ok = *std::max_element(worst, worst + 6) < kTol && secs < 60.0;
  return {ok, fmt("%d instances each; worst rel err conv %.1e pool %.1e relu %.1e dense %.1e lstm %.1e "
                  "softmax+ce %.1e; %.1f s",
                  kInstances, worst[0], worst[1], worst[2], worst[3], worst[4], worst[5], secs)};
}

Verdict dsp_oracles() {
  Rng rng(4);
  int median_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = testgen::size_in(rng, 1, 300);
    const std::size_t window = 2 * testgen::size_in(rng, 0, 40) + 1;
    const auto x = i % 2 ? testgen::doubles(rng, n) : testgen::tied_doubles(rng, n, 5);
    median_bad += dsp::median_filter(x, window) != oracle::sort_median(x, window);
  }

  int baseline_bad = 0;
  for (int i = 0; i < 20; ++i) {
    const double fs = i % 2 ? 360.0 : testgen::size_in(rng, 50, 500);
    const std::vector<double> x(testgen::size_in(rng, 1, 2000), rng.uniform(-5.0, 5.0));
    for (double v : dsp::remove_baseline(x, fs)) baseline_bad += v != 0.0;
  }

  std::vector<double> sine(3600);
  const double two_pi_f = 2.0 * std::numbers::pi * 5.0;
  for (std::size_t i = 0; i < sine.size(); ++i) sine[i] = std::sin(two_pi_f * static_cast<double>(i) / 360.0);
  const auto y = dsp::resample(sine, 360.0, 128.0);
  double se = 0.0;
  std::size_t counted = 0;
  for (std::size_t k = 64; k + 64 < y.size(); ++k, ++counted) {
    const double d = y[k] - std::sin(two_pi_f * static_cast<double>(k) / 128.0);
    se += d * d;
  }
  const double rms = std::sqrt(se / static_cast<double>(counted));
  return {median_bad == 0 && baseline_bad == 0 && rms < 1e-2,
          fmt("median mismatches %d/1000; nonzero baseline residues %d; 5 Hz resample rms %.2e", median_bad,
              baseline_bad, rms)};
}

Verdict metric_oracles() {
  const double acc = *eval::accuracy(50, 40, 5, 5), se = *eval::sensitivity(50, 5), sp = *eval::specificity(40, 5);
  const bool rates = std::abs(acc - 90.000) <= 1e-3 && std::abs(se - 90.909) <= 1e-3 && std::abs(sp - 88.889) <= 1e-3;
  const std::vector<std::uint8_t> pos2 = {1, 1, 0, 0}, one = {1, 0};
  const std::vector<double> sep = {0.9, 0.8, 0.2, 0.1}, same = {0.3, 0.3, 0.3, 0.3}, inv = {0.4, 0.6};
  const double a1 = eval::auc(eval::roc_curve(sep, pos2)), a2 = eval::auc(eval::roc_curve(same, pos2)),
               a3 = eval::auc(eval::roc_curve(inv, one));
  return {rates && a1 == 1.0 && a2 == 0.5 && a3 == 0.0,
          fmt("acc %.3f se %.3f sp %.3f; auc %.1f %.1f %.1f", acc, se, sp, a1, a2, a3)};
}

Verdict parser_fixtures() {
  wfdb::RecordHeader h = wfdb::parse_header("t 1 360 2\nt.dat 212 200 12 0\n");
  const std::vector<std::uint8_t> a = {0xE8, 0x03, 0x00}, b = {0xFF, 0x0F, 0x00};
  const bool triples = wfdb::read_raw_signal(h, a)[0] == std::vector<int>{1000, 0} &&
                       wfdb::read_signal(h, a)[0] == std::vector<double>{5.0, 0.0} &&
                       wfdb::read_raw_signal(h, b)[0] == std::vector<int>{-1, 0};

  // (AFIB at 0 and (N at 1000, as raw annotation words
  const std::vector<std::uint8_t> atr = {0x00, 0x70, 0x05, 0xFC, '(', 'A', 'F', 'I', 'B', 0,
                                         0xE8, 0x73, 0x02, 0xFC, '(', 'N', 0x00, 0x00};
  const auto anns = wfdb::read_annotations(atr, 2000);
  const auto iv = wfdb::rhythm_intervals(anns, 2000);
  const bool intervals =
      iv == std::vector<wfdb::RhythmInterval>{{0, 1000, RhythmClass::AFIB}, {1000, 2000, RhythmClass::N}};

  std::vector<int> all;
  for (int v = -2048; v <= 2047; ++v) all.push_back(v);
  h = wfdb::parse_header("t 1 360 4096\nt.dat 212 200 12 0\n");
  const bool round_trip = wfdb::read_raw_signal(h, wfdb::encode_212(all))[0] == all;
  return {triples && intervals && round_trip,
          fmt("212 triples %s; AFIB/N intervals %s; 4096-value round trip %s", triples ? "ok" : "wrong",
              intervals ? "ok" : "wrong", round_trip ? "ok" : "wrong")};
}

Verdict training_sanity() {
  constexpr std::size_t kEpochs = 30;
  constexpr double kFs = 128.0, kNoise = 0.05;
  const auto train_set = synthetic::make_segments(100, 500, kFs, kNoise, 701);
  const auto test_set = synthetic::make_segments(20, 500, kFs, kNoise, 702);
  nn::TrainConfig cfg;
  cfg.epochs = kEpochs;
  cfg.batch_size = 32;
  cfg.seed = 703;
  const nn::TrainingData data{train_set.samples, train_set.labels, 500};

  auto run_once = [&](double& secs) {
    auto model = nn::build_arrhythmia_model<float>(704);
    const auto t0 = Clock::now();
    nn::train(model, data, cfg);
    secs = seconds_since(t0);
    return model;
  };
  double secs_a = 0, secs_b = 0;
  const auto model = run_once(secs_a);
  const auto pred = nn::argmax_rows(nn::predict(model, test_set.samples, 500));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == test_set.labels[i];
  const double acc = 100.0 * static_cast<double>(correct) / static_cast<double>(pred.size());

  const auto again = run_once(secs_b);
  const bool same = model_store::serialize(model) == model_store::serialize(again);
  return {acc >= 95.0 && secs_a < 300.0 && secs_b < 300.0 && same,
          fmt("%zu train / %zu test, %zu epochs: test accuracy %.2f%%, %.0f s per run, rerun %s",
              train_set.size(), test_set.size(), kEpochs, acc, std::max(secs_a, secs_b),
              same ? "bit-identical" : "differs")};
}

Verdict end_to_end_determinism() {
  const auto base = scratch() / "e2e";
  std::ostringstream log;
  cli::SynthOptions sy;
  sy.out = base / "raw";
  sy.records = 1;
  sy.seconds_per_rhythm = 10;
  sy.seed = 801;
  cli::cmd_synth(sy, log);
  cli::PreprocessOptions pre;
  pre.data_dir = sy.out;
  pre.out = base / "clean";
  cli::cmd_preprocess(pre, log);

  auto run = [&](const std::string& tag) {
    const auto dir = base / tag;
    cli::SegmentOptions seg;
    seg.in = pre.out;
    seg.out = dir / "ds";
    seg.build.seed = 802;
    cli::cmd_segment(seg, log);
    cli::TrainOptions tr;
    tr.dataset = seg.out;
    tr.out = dir / "model";
    tr.epochs = 3;
    tr.batch_size = 16;
    tr.seed = 803;
    cli::cmd_train(tr, log);
    cli::EvaluateOptions ev;
    ev.model = tr.out / "model.ecgm";
    ev.dataset = seg.out;
    ev.out = dir / "eval";
    cli::cmd_evaluate(ev, log);
    return dir;
  };
  const auto a = run("a"), b = run("b");
  const auto model_a = slurp(a / "model/model.ecgm"), metrics_a = slurp(a / "eval/metrics.csv");
  const bool model_same = !model_a.empty() && model_a == slurp(b / "model/model.ecgm");
  const bool metrics_same = !metrics_a.empty() && metrics_a == slurp(b / "eval/metrics.csv");
  return {model_same && metrics_same, fmt("model.ecgm %s, metrics.csv %s", model_same ? "identical" : "differs",
                                          metrics_same ? "identical" : "differs")};
}

Verdict bench() {
  std::ostringstream log;
  cli::BenchOptions opt;
  opt.out = scratch() / "bench";
  const auto r = cli::cmd_bench(opt, log);
  return {r.stats.mean_ms < 50.0,
          fmt("mean %.3f ms over %zu runs, p95 %.3f ms; Raspberry Pi reference %.3f ms, not asserted",
              r.stats.mean_ms, r.stats.iterations, r.stats.p95_ms, cli::kReferenceLatencyMs)};
}

}  // namespace

int main() {
  report(1, "shape chain 451,216,207,99,95,46", shape_chain);
  report(2, "34361 parameters, model file <= 200000 bytes", parameter_budget);
  report(3, "analytic gradients match central differences < 1e-4 in under 60 s", gradients);
  report(4, "median, baseline and resampling oracles", dsp_oracles);
  report(5, "hand-case rates within 0.001 and degenerate AUCs", metric_oracles);
  report(6, "format 212 and annotation fixtures", parser_fixtures);
  report(7, "synthetic 9-class training >= 95% in 30 epochs, < 5 min, deterministic", training_sanity);
  report(8, "repeated segment/train/evaluate runs are byte-identical", end_to_end_determinism);
  report(9, "mean single-segment inference < 50 ms", bench);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
