#include "ecglite/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ecglite/error.hpp"

namespace ecglite::eval {

void ConfusionMatrix::add(std::size_t truth, std::size_t pred, std::size_t n) {
  if (truth >= k_ || pred >= k_) throw ArgumentError("confusion: label out of range");
  counts_[truth * k_ + pred] += n;
}

std::size_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t s = 0;
  for (std::size_t c = 0; c < k_; ++c) s += at(c, c);
  return s;
}

std::size_t ConfusionMatrix::fn(std::size_t c) const {
  std::size_t s = 0;
  for (std::size_t j = 0; j < k_; ++j) {
    if (j != c) s += at(c, j);
  }
  return s;
}

std::size_t ConfusionMatrix::fp(std::size_t c) const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < k_; ++i) {
    if (i != c) s += at(i, c);
  }
  return s;
}

ConfusionMatrix confusion(std::span<const std::uint8_t> truth, std::span<const std::uint8_t> pred,
                          std::size_t k) {
  if (truth.size() != pred.size()) {
    throw ArgumentError("confusion: " + std::to_string(truth.size()) + " labels vs " +
                        std::to_string(pred.size()) + " predictions");
  }
  ConfusionMatrix cm(k);
  for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], pred[i]);
  return cm;
}

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::optional<double> accuracy(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn) {
  return ratio(tp + tn, tp + tn + fp + fn);
}
std::optional<double> sensitivity(std::size_t tp, std::size_t fn) { return ratio(tp, tp + fn); }
std::optional<double> specificity(std::size_t tn, std::size_t fp) { return ratio(tn, tn + fp); }

std::optional<double> overall_accuracy(const ConfusionMatrix& cm) { return ratio(cm.trace(), cm.total()); }
std::optional<double> accuracy(const ConfusionMatrix& cm, std::size_t c) {
  return accuracy(cm.tp(c), cm.tn(c), cm.fp(c), cm.fn(c));
}
std::optional<double> sensitivity(const ConfusionMatrix& cm, std::size_t c) {
  return sensitivity(cm.tp(c), cm.fn(c));
}
std::optional<double> specificity(const ConfusionMatrix& cm, std::size_t c) {
  return specificity(cm.tn(c), cm.fp(c));
}

std::optional<double> macro_mean(std::span<const std::optional<double>> values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const std::uint8_t> positive) {
  if (scores.size() != positive.size()) throw ArgumentError("roc_curve: scores and truth differ in length");
  const std::size_t pos = static_cast<std::size_t>(std::count_if(positive.begin(), positive.end(),
                                                                 [](std::uint8_t v) { return v != 0; }));
  const std::size_t neg = positive.size() - pos;
  if (pos == 0 || neg == 0) throw ArgumentError("degenerate ROC");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> pts{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) {
      if (positive[order[i]]) {
        ++tp;
      } else {
        ++fp;
      }
    }
    pts.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                   static_cast<double>(tp) / static_cast<double>(pos)});
  }
  // the last group already reaches (1, 1), the -inf threshold
  return pts;
}

double auc(std::span<const RocPoint> points) {
  double a = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    a += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) * 0.5;
  }
  return a;
}

EvalReport build_report(std::span<const std::uint8_t> truth, std::span<const float> probs) {
  const std::size_t k = kNumClasses;
  if (probs.size() != truth.size() * k) throw ShapeError("build_report: probabilities must be [N, 9]");
  std::vector<std::uint8_t> pred(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const float* row = probs.data() + i * k;
    pred[i] = static_cast<std::uint8_t>(std::max_element(row, row + k) - row);
  }

  EvalReport r;
  r.cm = confusion(truth, pred, k);
  r.overall_acc = overall_accuracy(r.cm);
  std::array<std::optional<double>, kNumClasses> accs, ses, sps, aucs;
  std::vector<double> scores(truth.size());
  std::vector<std::uint8_t> is_pos(truth.size());
  for (std::size_t c = 0; c < k; ++c) {
    auto& m = r.per_class[c];
    m.acc = accs[c] = accuracy(r.cm, c);
    m.se = ses[c] = sensitivity(r.cm, c);
    m.sp = sps[c] = specificity(r.cm, c);
    m.support = r.cm.tp(c) + r.cm.fn(c);
    for (std::size_t i = 0; i < truth.size(); ++i) {
      scores[i] = probs[i * k + c];
      is_pos[i] = truth[i] == c;
    }
    if (m.support > 0 && m.support < truth.size()) {
      m.roc = roc_curve(scores, is_pos);
      m.auc = aucs[c] = auc(m.roc);
    }
  }
  r.macro_acc = macro_mean(accs);
  r.macro_se = macro_mean(ses);
  r.macro_sp = macro_mean(sps);
  r.macro_auc = macro_mean(aucs);
  return r;
}

LatencyStats latency_stats(std::vector<double> samples_ms) {
  if (samples_ms.empty()) throw ArgumentError("latency_stats: no samples");
  std::sort(samples_ms.begin(), samples_ms.end());
  LatencyStats s;
  s.iterations = samples_ms.size();
  s.mean_ms = std::accumulate(samples_ms.begin(), samples_ms.end(), 0.0) / static_cast<double>(s.iterations);
  // nearest-rank percentiles
  auto rank = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(s.iterations)));
    return samples_ms[std::clamp<std::size_t>(idx, 1, s.iterations) - 1];
  };
  s.p50_ms = rank(0.50);
  s.p95_ms = rank(0.95);
  return s;
}

}  // namespace ecglite::eval
