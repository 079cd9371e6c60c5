#pragma once

// One-vs-rest classification metrics, ROC curves and the report writer.
// Rates are percentages; an undefined rate (zero denominator) is nullopt
// and renders as "NA".

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecglite/rhythm.hpp"

namespace ecglite::eval {

class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t k = kNumClasses) : k_(k), counts_(k * k, 0) {}

  std::size_t classes() const { return k_; }
  std::size_t at(std::size_t truth, std::size_t pred) const { return counts_[truth * k_ + pred]; }
  void add(std::size_t truth, std::size_t pred, std::size_t n = 1);
  std::size_t total() const;
  std::size_t trace() const;

  std::size_t tp(std::size_t c) const { return at(c, c); }
  std::size_t fn(std::size_t c) const;
  std::size_t fp(std::size_t c) const;
  std::size_t tn(std::size_t c) const { return total() - tp(c) - fn(c) - fp(c); }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t k_;
  std::vector<std::size_t> counts_;
};

/// Throws ArgumentError on length mismatch or a label outside [0, k).
ConfusionMatrix confusion(std::span<const std::uint8_t> truth, std::span<const std::uint8_t> pred,
                          std::size_t k = kNumClasses);

std::optional<double> overall_accuracy(const ConfusionMatrix& cm);
std::optional<double> accuracy(const ConfusionMatrix& cm, std::size_t c);
std::optional<double> sensitivity(const ConfusionMatrix& cm, std::size_t c);
std::optional<double> specificity(const ConfusionMatrix& cm, std::size_t c);

// Same formulas from raw counts.
std::optional<double> accuracy(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn);
std::optional<double> sensitivity(std::size_t tp, std::size_t fn);
std::optional<double> specificity(std::size_t tn, std::size_t fp);

/// Mean over the defined values; nullopt when none is defined.
std::optional<double> macro_mean(std::span<const std::optional<double>> values);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

/// Threshold sweep from +inf down through every distinct score to -inf.
/// Tied scores move together. Throws ArgumentError("degenerate ROC") when
/// `positive` holds only one class.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const std::uint8_t> positive);
/// Trapezoidal area.
double auc(std::span<const RocPoint> points);

struct ClassMetrics {
  std::optional<double> acc, se, sp, auc;
  std::size_t support = 0;
  std::vector<RocPoint> roc;  // empty when undefined
};

struct LatencyStats {
  std::size_t iterations = 0;
  double mean_ms = 0.0, p50_ms = 0.0, p95_ms = 0.0;
};

struct EvalReport {
  ConfusionMatrix cm;
  std::array<ClassMetrics, kNumClasses> per_class;
  std::optional<double> overall_acc;
  std::optional<double> macro_acc, macro_se, macro_sp, macro_auc;
  std::optional<LatencyStats> latency;
  std::optional<std::size_t> model_bytes;
};

/// `probs` is [N, 9] row-major; predictions are row argmaxes.
EvalReport build_report(std::span<const std::uint8_t> truth, std::span<const float> probs);

LatencyStats latency_stats(std::vector<double> samples_ms);

/// confusion.csv, metrics.csv, roc_<class>.csv, confusion.svg and roc.svg
/// under `dir` (created if needed). Latency, when present, goes to
/// latency.csv so the other files stay reproducible.
void emit_report(const EvalReport& report, const std::filesystem::path& dir);

/// Rows of metrics.csv keyed by their first column.
struct MetricsRow {
  std::string name;
  std::optional<double> acc, se, sp, auc;
  std::size_t support = 0;
};
std::vector<MetricsRow> parse_metrics_csv(const std::string& text);

/// "%.4f" or "NA".
std::string format_rate(const std::optional<double>& v);

}  // namespace ecglite::eval
