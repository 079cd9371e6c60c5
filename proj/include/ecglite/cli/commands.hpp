#pragma once

// Pipeline subcommands. Each cmd_* function does the work and throws on
// failure; run() parses argv, dispatches, and maps errors to exit codes.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ecglite/dataset.hpp"
#include "ecglite/eval.hpp"
#include "ecglite/nn/train.hpp"

namespace ecglite::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

/// Environment variable holding the default WFDB data directory.
inline constexpr const char* kDataDirEnv = "ECGLITE_DATA";

/// Bad flag values detected after parsing (exit code 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

struct PreprocessOptions {
  std::filesystem::path data_dir;
  std::vector<std::string> records;  // empty: every .hea in data_dir
  std::filesystem::path out;
  bool parallel = false;
};

struct PreprocessResult {
  std::vector<std::string> written;
  std::vector<std::string> failed;
};

struct SegmentOptions {
  std::filesystem::path in;
  std::filesystem::path out;
  dataset::BuildOptions build;
};

struct TrainOptions {
  std::filesystem::path dataset;
  std::filesystem::path out;
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  bool parallel = false;
};

struct EvaluateOptions {
  std::filesystem::path model;
  std::filesystem::path dataset;
  std::filesystem::path out;
  bool parallel = false;
};

struct InferOptions {
  std::filesystem::path model;
  std::filesystem::path dataset;
  std::string split = "test";  // test, train or all
  std::filesystem::path out;
};

struct BenchOptions {
  std::optional<std::filesystem::path> model;  // untrained classifier when absent
  std::size_t iterations = 100;
  std::size_t warmup = 10;
  std::filesystem::path out;
};

struct BenchResult {
  eval::LatencyStats stats;
  std::size_t model_bytes = 0;
};

struct SynthOptions {
  std::filesystem::path out;
  std::size_t records = 2;
  double seconds_per_rhythm = 20.0;
  double sampling_rate = 360.0;
  int format = 212;
  std::uint64_t seed = 0;
};

/// Raspberry Pi latency printed next to the measured figure for comparison.
inline constexpr double kReferenceLatencyMs = 5.127;

PreprocessResult cmd_preprocess(const PreprocessOptions& opt, std::ostream& log);
dataset::SegmentSet cmd_segment(const SegmentOptions& opt, std::ostream& log);
std::vector<nn::EpochRecord> cmd_train(const TrainOptions& opt, std::ostream& log);
eval::EvalReport cmd_evaluate(const EvaluateOptions& opt, std::ostream& log);
void cmd_infer(const InferOptions& opt, std::ostream& log);
BenchResult cmd_bench(const BenchOptions& opt, std::ostream& log);
std::vector<std::string> cmd_synth(const SynthOptions& opt, std::ostream& log);

/// Full command line, argv[0] included.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ecglite::cli
