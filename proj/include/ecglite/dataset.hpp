#pragma once

// Labeled fixed-length segments, class balancing, train/test split and the
// on-disk dataset container ("ecglite-ds-v1").

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ecglite/preprocess.hpp"
#include "ecglite/rhythm.hpp"
#include "ecglite/rng.hpp"

namespace ecglite::dataset {

inline constexpr std::size_t kSegmentLength = 500;
inline constexpr std::size_t kDefaultStride = 128;
inline constexpr std::size_t kDefaultCap = 10000;
inline constexpr double kDefaultTrainFraction = 0.85;
inline constexpr const char* kFormatVersion = "ecglite-ds-v1";

using ClassCounts = std::array<std::size_t, kNumClasses>;
using ClassWeights = std::array<double, kNumClasses>;

struct SegmentSource {
  std::string record;
  std::size_t onset = 0;
  friend bool operator==(const SegmentSource&, const SegmentSource&) = default;
};

struct Segment {
  std::vector<float> samples;
  RhythmClass label = RhythmClass::Other;
  SegmentSource source;
};

/// Windows [s, s + window) for s = onset, onset + stride, ... inside each
/// nine-class rhythm interval. Windows never straddle an interval boundary.
std::vector<Segment> segment_record(const CleanRecord& record, std::size_t lead,
                                    std::size_t window = kSegmentLength,
                                    std::size_t stride = kDefaultStride);

/// Keeps a uniform random subset of `cap` segments of class `cls` (original
/// order preserved); other classes pass through.
std::vector<Segment> cap_class(std::vector<Segment> segments, RhythmClass cls, std::size_t cap,
                               Rng& rng);
std::vector<Segment> cap_class(std::vector<Segment> segments, RhythmClass cls, std::size_t cap,
                               std::uint64_t seed);

ClassCounts count_classes(std::span<const Segment> segments);
ClassCounts count_classes(std::span<const RhythmClass> labels);

/// w_c = N_total / (9 * N_c), or 0 for an absent class.
ClassWeights class_weights(const ClassCounts& counts);

struct Split {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

/// Uniform permutation under `seed`; the first round(fraction * n) go to train.
Split split(std::size_t n, double train_fraction, std::uint64_t seed);
Split split(std::size_t n, double train_fraction, Rng& rng);

/// Whole records go to one side; records are taken in shuffled order until
/// the train side reaches round(fraction * n) segments.
Split split_by_record(std::span<const SegmentSource> sources, double train_fraction, Rng& rng);

std::array<float, kNumClasses> one_hot(RhythmClass label);

enum class SplitMode { kSegment, kRecord };

struct BuildOptions {
  std::size_t lead = 0;
  std::size_t window = kSegmentLength;
  std::size_t stride = kDefaultStride;
  std::size_t cap = kDefaultCap;
  std::uint64_t seed = 0;
  double train_fraction = kDefaultTrainFraction;
  SplitMode split_mode = SplitMode::kSegment;
};

struct SegmentSet {
  BuildOptions options;
  std::vector<float> samples;  // [N, window], row-major
  std::vector<RhythmClass> labels;
  std::vector<SegmentSource> sources;
  std::vector<std::uint8_t> is_train;
  ClassCounts class_counts{};
  ClassWeights class_weights{};

  std::size_t size() const { return labels.size(); }
  std::size_t window() const { return options.window; }
  std::span<const float> segment(std::size_t i) const {
    return std::span<const float>(samples).subspan(i * window(), window());
  }
  std::vector<std::size_t> indices(bool train) const;
};

/// Segments every record, caps every class at options.cap, weights classes
/// and splits, consuming one generator seeded with options.seed.
SegmentSet build_segment_set(std::span<const CleanRecord> records, const BuildOptions& options);

SegmentSet from_segments(std::vector<Segment> segments, const BuildOptions& options);

/// Directory with manifest.txt, segments.f32 ([N, window] float32 LE),
/// labels.u8, split.u8 (1 = train) and sources.csv.
void save_segment_set(const SegmentSet& set, const std::filesystem::path& dir);
SegmentSet load_segment_set(const std::filesystem::path& dir);

}  // namespace ecglite::dataset
