#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ecglite/cli/commands.hpp"
#include "ecglite/model_store.hpp"

using namespace ecglite;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "ecglite");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path root() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "ecglite_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// synth -> preprocess -> segment -> train -> evaluate under `base`
void pipeline(const fs::path& base) {
  const auto s = base.string();
  REQUIRE(run({"synth", "--out", s + "/raw", "--records", "1", "--seconds", "10", "--seed", "3"}).code == 0);
  REQUIRE(run({"preprocess", "--data", s + "/raw", "--out", s + "/clean"}).code == 0);
  REQUIRE(run({"segment", "--in", s + "/clean", "--out", s + "/ds", "--seed", "4"}).code == 0);
  REQUIRE(run({"train", "--dataset", s + "/ds", "--out", s + "/model", "--epochs", "2", "--batch", "16",
               "--seed", "5"}).code == 0);
  REQUIRE(run({"evaluate", "--model", s + "/model/model.ecgm", "--dataset", s + "/ds", "--out", s + "/eval"})
              .code == 0);
}

const fs::path& trained() {
  static const fs::path dir = [] {
    const auto d = root() / "run1";
    pipeline(d);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"train", "--dataset", "x", "--seed", "1"}).code == 1);  // no --out
  CHECK(run({"bench", "--out", (root() / "b").string(), "--bogus"}).code == 1);
  CHECK(run({"bench", "--out", (root() / "b").string(), "--iterations", "0"}).code == 1);
  CHECK(run({"segment", "--in", "x", "--out", "y"}).code == 1);  // no --seed
  const auto help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("preprocess") != std::string::npos);
}

TEST_CASE("data errors exit 2") {
  const auto empty = root() / "empty";
  fs::create_directories(empty);
  CHECK(run({"preprocess", "--data", empty.string(), "--out", (root() / "p").string()}).code == 2);
  CHECK(run({"preprocess", "--data", (root() / "missing").string(), "--out", (root() / "p").string()}).code == 2);
  CHECK(run({"train", "--dataset", (root() / "missing").string(), "--out", (root() / "t").string(), "--seed", "1"})
            .code == 2);
  CHECK(run({"bench", "--model", (root() / "missing.ecgm").string(), "--out", (root() / "b").string()}).code == 2);
}

TEST_CASE("data directory from the environment") {
  const auto raw = root() / "envraw";
  REQUIRE(run({"synth", "--out", raw.string(), "--records", "1", "--seconds", "2"}).code == 0);
  ::unsetenv(cli::kDataDirEnv);
  CHECK(run({"preprocess", "--out", (root() / "envclean").string()}).code == 1);
  ::setenv(cli::kDataDirEnv, raw.string().c_str(), 1);
  const auto r = run({"preprocess", "--out", (root() / "envclean").string()});
  ::unsetenv(cli::kDataDirEnv);
  CHECK(r.code == 0);
  CHECK(fs::exists(root() / "envclean" / "summary.txt"));
}

TEST_CASE("end-to-end pipeline writes its outputs") {
  const auto& d = trained();
  for (const char* f : {"model/model.ecgm", "model/history.csv", "eval/metrics.csv", "eval/confusion.csv",
                        "eval/roc.svg", "eval/confusion.svg", "eval/latency.csv", "clean/summary.txt"}) {
    CHECK_MESSAGE(fs::exists(d / f), f);
  }
  const auto history = slurp(d / "model/history.csv");
  CHECK(history.rfind("epoch,loss,weighted_accuracy\n", 0) == 0);
  CHECK(std::count(history.begin(), history.end(), '\n') == 3);

  const auto inf = run({"infer", "--model", (d / "model/model.ecgm").string(), "--dataset", (d / "ds").string(),
                        "--split", "all", "--out", (d / "infer").string()});
  REQUIRE(inf.code == 0);
  const auto preds = slurp(d / "infer/predictions.csv");
  CHECK(preds.rfind("index,record,onset,truth,predicted,p_AFIB", 0) == 0);
  const auto set = dataset::load_segment_set(d / "ds");
  CHECK(static_cast<std::size_t>(std::count(preds.begin(), preds.end(), '\n')) == set.size() + 1);
  CHECK(run({"infer", "--model", (d / "model/model.ecgm").string(), "--dataset", (d / "ds").string(), "--split",
             "nope", "--out", (d / "infer").string()})
            .code == 1);
}

TEST_CASE("reported metrics match a library-level evaluation") {
  const auto& d = trained();
  const auto model = model_store::load_arrhythmia(d / "model/model.ecgm");
  const auto set = dataset::load_segment_set(d / "ds");
  std::vector<float> x;
  std::vector<std::uint8_t> y;
  for (const auto i : set.indices(false)) {
    const auto row = set.segment(i);
    x.insert(x.end(), row.begin(), row.end());
    y.push_back(static_cast<std::uint8_t>(set.labels[i]));
  }
  const auto probs = nn::predict(model, x, nn::kInputLength);
  const auto report = eval::build_report(y, probs.data());
  const auto rows = eval::parse_metrics_csv(slurp(d / "eval/metrics.csv"));
  REQUIRE(rows.size() == 11);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    CHECK(rows[c].support == report.per_class[c].support);
    CHECK(eval::format_rate(rows[c].se) == eval::format_rate(report.per_class[c].se));
    CHECK(eval::format_rate(rows[c].auc) == eval::format_rate(report.per_class[c].auc));
  }
  CHECK(eval::format_rate(rows[10].acc) == eval::format_rate(report.overall_acc));
}

TEST_CASE("rerunning the pipeline is byte-identical") {
  const auto& a = trained();
  const auto b = root() / "run2";
  pipeline(b);
  for (const char* f : {"ds/segments.f32", "model/model.ecgm", "model/history.csv", "eval/metrics.csv",
                        "eval/confusion.csv", "eval/roc.svg"}) {
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
  }
}

TEST_CASE("bench") {
  const auto out = root() / "bench";
  const auto r = run({"bench", "--iterations", "20", "--warmup", "2", "--out", out.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("5.127") != std::string::npos);
  const auto csv = slurp(out / "bench.csv");
  CHECK(csv.rfind("iterations,warmup,mean_ms,p50_ms,p95_ms,model_bytes,reference_ms\n", 0) == 0);

  std::ostringstream log;
  cli::BenchOptions opt;
  opt.iterations = 30;
  opt.warmup = 3;
  opt.out = out;
  const auto first = cli::cmd_bench(opt, log);
  const auto second = cli::cmd_bench(opt, log);
  CHECK(first.stats.p50_ms <= first.stats.p95_ms);
  CHECK(first.stats.mean_ms > 0);
  CHECK(first.model_bytes == second.model_bytes);
  // loose: only guards against wildly unstable timing
  CHECK(first.stats.mean_ms < 3 * second.stats.mean_ms);
  CHECK(second.stats.mean_ms < 3 * first.stats.mean_ms);
}

TEST_CASE("config file with a command-line override") {
  const auto cfg = root() / "train.ini";
  const auto& d = trained();
  {
    std::ofstream f(cfg);
    f << "[train]\ndataset=" << (d / "ds").string() << "\nout=" << (root() / "cfg_a").string()
      << "\nepochs=1\nbatch=16\nseed=9\n";
  }
  REQUIRE(run({"--config", cfg.string(), "train"}).code == 0);
  const auto h1 = slurp(root() / "cfg_a/history.csv");
  CHECK(std::count(h1.begin(), h1.end(), '\n') == 2);
  REQUIRE(run({"--config", cfg.string(), "train", "--epochs", "2", "--out", (root() / "cfg_b").string()}).code == 0);
  const auto h = slurp(root() / "cfg_b/history.csv");
  CHECK(std::count(h.begin(), h.end(), '\n') == 3);
}

TEST_CASE("divergent training exits 3") {
  const auto& d = trained();
  const auto r = run({"train", "--dataset", (d / "ds").string(), "--out", (root() / "diverge").string(), "--epochs",
                      "5", "--batch", "8", "--lr", "1e30", "--seed", "1"});
  CHECK(r.code == 3);
  CHECK(r.err.find("non-finite") != std::string::npos);
}
