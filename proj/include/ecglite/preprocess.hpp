#pragma once

// Per-record cleaning pipeline and the cleaned-record container.
//
// Order: baseline removal at the native rate, resampling to 128 Hz, then
// min-max normalization over the whole record (per channel).

#include <filesystem>
#include <string>
#include <vector>

#include "ecglite/kernels.hpp"
#include "ecglite/wfdb.hpp"

namespace ecglite {

inline constexpr const char* kRecordFormatVersion = "ecglite-rec-v1";

struct CleanRecord {
  std::string name;
  double sampling_rate = 128.0;
  std::vector<std::vector<float>> channels;  // each in [-1, 1]
  std::vector<wfdb::RhythmInterval> rhythms;

  std::size_t n_samples() const { return channels.empty() ? 0 : channels.front().size(); }
};

/// Maps interval bounds through round(i * fs_out / fs_in), dropping intervals
/// that collapse to nothing.
std::vector<wfdb::RhythmInterval> rescale_intervals(const std::vector<wfdb::RhythmInterval>& in,
                                                    double fs_in, double fs_out,
                                                    std::size_t n_out);

CleanRecord preprocess_record(const wfdb::EcgRecord& record,
                              kernels::ExecPolicy policy = kernels::ExecPolicy::kSerial);

/// Writes <dir>/<name>.rec (text) and <dir>/<name>.f32 (channel-major float32 LE).
void save_clean_record(const CleanRecord& record, const std::filesystem::path& dir);
CleanRecord load_clean_record(const std::filesystem::path& dir, const std::string& name);

/// Record names with a .rec file in `dir`, sorted.
std::vector<std::string> list_clean_records(const std::filesystem::path& dir);

}  // namespace ecglite
