#pragma once

// Generated stand-ins for annotated ECG: one periodic template per rhythm
// class, with random phase, rate and amplitude jitter plus white noise.
// Used for desk-scale training runs and WFDB fixtures.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ecglite/rhythm.hpp"
#include "ecglite/rng.hpp"
#include "ecglite/wfdb.hpp"

namespace ecglite::synthetic {

struct Template {
  double period;  // seconds between pulses
  int shape;      // 0 narrow pulse, 1 wide pulse, 2 biphasic
};

/// Template of each of the nine classes: three beat periods crossed with
/// three pulse morphologies.
Template class_template(RhythmClass c);

/// Writes `out.size()` samples of class `c` at `fs`, unnormalized (about
/// 1 mV peak). Draws phase, rate, amplitude and noise from `rng`.
void render(RhythmClass c, double fs, double noise, Rng& rng, std::span<double> out);

struct SegmentBatch {
  std::size_t length = 0;
  std::vector<float> samples;  // [N, length], each row min-max normalized
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
};

/// `per_class` segments of every class in canonical order, then shuffled.
SegmentBatch make_segments(std::size_t per_class, std::size_t length, double fs, double noise,
                           std::uint64_t seed);

struct RecordPlan {
  std::string name;
  double sampling_rate = 360.0;
  std::vector<RhythmClass> rhythm_sequence;
  double seconds_per_rhythm = 30.0;
  std::size_t n_signals = 2;
  int format = 212;
  double noise = 0.03;
  std::uint64_t seed = 0;
};

/// Renders a record whose rhythm intervals follow the plan. Every channel
/// carries the same rhythm at a different scale, plus slow baseline drift.
wfdb::EcgRecord make_record(const RecordPlan& plan);

/// Writes <dir>/<name>.hea, .dat and .atr for a record made by make_record.
void write_wfdb(const wfdb::EcgRecord& record, int format, const std::filesystem::path& dir);

}  // namespace ecglite::synthetic
