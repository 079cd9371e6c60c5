#include "ecglite/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "ecglite/dsp.hpp"
#include "ecglite/error.hpp"
#include "io_util.hpp"

namespace ecglite::synthetic {

namespace {

constexpr double kPeriods[] = {0.5, 0.8, 1.2};
constexpr int kGainAdu = 200;
constexpr int kAdcZero = 1024;

double pulse(int shape, double dt) {
  switch (shape) {
    case 0: {
      const double s = 0.02;
      return std::exp(-0.5 * dt * dt / (s * s));
    }
    case 1: {
      const double s = 0.06;
      return std::exp(-0.5 * dt * dt / (s * s));
    }
    default: {
      // derivative-of-gaussian, peak magnitude ~1
      const double s = 0.03;
      return -dt / s * std::exp(0.5 - 0.5 * dt * dt / (s * s));
    }
  }
}

}  // namespace

Template class_template(RhythmClass c) {
  const auto i = class_index(c);
  if (i >= kNumClasses) throw ArgumentError("no template for class Other");
  return {kPeriods[i / 3], static_cast<int>(i % 3)};
}

void render(RhythmClass c, double fs, double noise, Rng& rng, std::span<double> out) {
  const Template t = class_template(c);
  const double period = t.period * rng.uniform(0.96, 1.04);
  const double phase = rng.uniform(0.0, period);
  const double amp = rng.uniform(0.8, 1.2);
  for (std::size_t n = 0; n < out.size(); ++n) {
    const double time = static_cast<double>(n) / fs + phase;
    // distance to the nearest pulse centre
    double dt = std::fmod(time, period);
    if (dt > 0.5 * period) dt -= period;
    out[n] = amp * pulse(t.shape, dt) + noise * rng.normal();
  }
}

SegmentBatch make_segments(std::size_t per_class, std::size_t length, double fs, double noise,
                           std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = per_class * kNumClasses;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order.begin(), order.end());

  SegmentBatch out;
  out.length = length;
  out.samples.resize(n * length);
  out.labels.resize(n);
  std::vector<double> buf(length);
  for (std::size_t k = 0; k < n; ++k) {
    const auto cls = kAllClasses[k / per_class];
    render(cls, fs, noise, rng, buf);
    const auto norm = dsp::normalize(buf);
    const std::size_t row = order[k];
    std::transform(norm.begin(), norm.end(), out.samples.begin() + row * length,
                   [](double v) { return static_cast<float>(v); });
    out.labels[row] = static_cast<std::uint8_t>(class_index(cls));
  }
  return out;
}

wfdb::EcgRecord make_record(const RecordPlan& plan) {
  if (plan.rhythm_sequence.empty()) throw ArgumentError("record plan needs at least one rhythm");
  if (plan.n_signals == 0) throw ArgumentError("record plan needs at least one signal");
  Rng rng(plan.seed);
  const auto per = static_cast<std::size_t>(std::llround(plan.seconds_per_rhythm * plan.sampling_rate));
  const std::size_t n = per * plan.rhythm_sequence.size();

  wfdb::EcgRecord rec;
  rec.header.record_name = plan.name;
  rec.header.n_signals = plan.n_signals;
  rec.header.sampling_rate = plan.sampling_rate;
  rec.header.n_samples = n;
  for (std::size_t s = 0; s < plan.n_signals; ++s) {
    wfdb::SignalSpec spec;
    spec.file_name = plan.name + ".dat";
    spec.format = plan.format;
    spec.gain = kGainAdu;
    spec.baseline = kAdcZero;
    spec.adc_zero = kAdcZero;
    spec.adc_resolution = plan.format == 212 ? 12 : 16;
    spec.description = s == 0 ? "MLII" : "V" + std::to_string(s);
    rec.header.signals.push_back(spec);
  }

  std::vector<double> base(n);
  for (std::size_t r = 0; r < plan.rhythm_sequence.size(); ++r) {
    const auto cls = plan.rhythm_sequence[r];
    render(cls, plan.sampling_rate, plan.noise, rng,
           std::span<double>(base).subspan(r * per, per));
    rec.rhythms.push_back({r * per, (r + 1) * per, cls});
  }
  // merge consecutive repeats, as a real annotator would
  std::vector<wfdb::RhythmInterval> merged;
  for (const auto& iv : rec.rhythms) {
    if (!merged.empty() && merged.back().label == iv.label) {
      merged.back().end = iv.end;
    } else {
      merged.push_back(iv);
    }
  }
  rec.rhythms = std::move(merged);

  const double drift_hz = 0.25;
  for (std::size_t s = 0; s < plan.n_signals; ++s) {
    const double scale = 1.0 / static_cast<double>(s + 1);
    std::vector<double> ch(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / plan.sampling_rate;
      const double drift = 0.3 * std::sin(2.0 * std::numbers::pi * drift_hz * t + static_cast<double>(s));
      // quantize now so the record equals what the .dat file will hold
      const double adu = std::round((scale * base[i] + drift) * kGainAdu);
      ch[i] = adu / kGainAdu;
    }
    rec.channels.push_back(std::move(ch));
  }
  return rec;
}

void write_wfdb(const wfdb::EcgRecord& record, int format, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& h = record.header;
  std::vector<int> interleaved(h.n_samples * h.n_signals);
  for (std::size_t i = 0; i < h.n_samples; ++i) {
    for (std::size_t s = 0; s < h.n_signals; ++s) {
      const auto& spec = h.signals[s];
      interleaved[i * h.n_signals + s] =
          static_cast<int>(std::lround(record.channels[s][i] * spec.gain)) + spec.baseline;
    }
  }
  wfdb::RecordHeader header = h;
  for (auto& spec : header.signals) {
    spec.format = format;
    spec.file_name = h.record_name + ".dat";
  }
  const auto dat = format == 212 ? wfdb::encode_212(interleaved) : wfdb::encode_16(interleaved);

  std::vector<wfdb::Annotation> ann;
  for (const auto& iv : record.rhythms) {
    ann.push_back({iv.onset, wfdb::code::kRhythm, std::string(aux_string(iv.label))});
  }

  io::write_text(dir / (h.record_name + ".hea"), wfdb::format_header(header));
  io::write_bytes(dir / (h.record_name + ".dat"), dat);
  io::write_bytes(dir / (h.record_name + ".atr"), wfdb::encode_annotations(ann));
}

}  // namespace ecglite::synthetic
