#pragma once

// Reader for WFDB record triplets: the text header (.hea), the binary
// signal file (.dat, formats 212 and 16) and the MIT annotation file (.atr).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ecglite/rhythm.hpp"

namespace ecglite::wfdb {

inline constexpr double kDefaultGain = 200.0;

struct SignalSpec {
  std::string file_name;
  int format = 0;            // 212 or 16
  double gain = kDefaultGain;  // adu per mV
  int baseline = 0;          // defaults to adc_zero when absent
  int adc_resolution = 12;
  int adc_zero = 0;
  std::string description;
};

struct RecordHeader {
  std::string record_name;
  std::size_t n_signals = 0;
  double sampling_rate = 0.0;
  std::size_t n_samples = 0;
  std::vector<SignalSpec> signals;
};

struct RhythmInterval {
  std::size_t onset = 0;
  std::size_t end = 0;  // exclusive
  RhythmClass label = RhythmClass::Other;

  std::size_t length() const { return end - onset; }
  friend bool operator==(const RhythmInterval&, const RhythmInterval&) = default;
};

struct EcgRecord {
  RecordHeader header;
  std::vector<std::vector<double>> channels;  // millivolts
  std::vector<RhythmInterval> rhythms;
};

/// Annotation type codes used here (MIT convention).
namespace code {
inline constexpr int kNormal = 1;
inline constexpr int kRhythm = 28;
inline constexpr int kSkip = 59;
inline constexpr int kNum = 60;
inline constexpr int kSubtype = 61;
inline constexpr int kChannel = 62;
inline constexpr int kAux = 63;
}  // namespace code

struct Annotation {
  std::size_t time = 0;
  int type = 0;
  std::optional<std::string> aux;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

/// Throws ParseError (with line number) on malformed lines and
/// UnsupportedFormatError for storage formats other than 212 and 16.
RecordHeader parse_header(std::string_view text);

/// Decodes the interleaved signal file into physical units,
/// (raw - baseline) / gain. All signals must live in the one buffer.
std::vector<std::vector<double>> read_signal(const RecordHeader& header,
                                             std::span<const std::uint8_t> bytes);

/// Raw integer samples, channel-major. Used by read_signal.
std::vector<std::vector<int>> read_raw_signal(const RecordHeader& header,
                                              std::span<const std::uint8_t> bytes);

std::vector<Annotation> read_annotations(std::span<const std::uint8_t> bytes,
                                         std::size_t n_samples);

/// Rhythm-change annotations (type 28, aux starting with "(") open an
/// interval that runs to the next change or to n_samples.
std::vector<RhythmInterval> rhythm_intervals(std::span<const Annotation> annotations,
                                             std::size_t n_samples);

/// Per-record inventory used for the parse-summary report.
struct ParseSummary {
  std::string record_name;
  std::map<std::string, std::size_t> samples_per_label;  // class name -> samples
  std::map<std::string, std::size_t> unknown_rhythms;    // aux -> count (mapped to Other)
  std::size_t n_intervals = 0;
};

ParseSummary summarize(const EcgRecord& record, std::span<const Annotation> annotations);
std::string format_summary(const ParseSummary& summary);

struct LoadedRecord {
  EcgRecord record;
  ParseSummary summary;
};

/// Reads <dir>/<name>.hea, the signal file it names, and <dir>/<name>.<annotator>.
/// A missing annotation file yields a record without rhythms.
LoadedRecord load_record(const std::filesystem::path& dir, const std::string& name,
                         const std::string& annotator = "atr");

// Fixture writers (tests and the `synth` command only).

std::vector<std::uint8_t> encode_212(std::span<const int> interleaved);
std::vector<std::uint8_t> encode_16(std::span<const int> interleaved);
std::vector<std::uint8_t> encode_annotations(std::span<const Annotation> annotations);
std::string format_header(const RecordHeader& header);

}  // namespace ecglite::wfdb
