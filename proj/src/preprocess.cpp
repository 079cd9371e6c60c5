#include "ecglite/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ecglite/dsp.hpp"
#include "ecglite/error.hpp"
#include "io_util.hpp"

namespace ecglite {

std::vector<wfdb::RhythmInterval> rescale_intervals(const std::vector<wfdb::RhythmInterval>& in,
                                                    double fs_in, double fs_out,
                                                    std::size_t n_out) {
  const double ratio = fs_out / fs_in;
  auto map = [&](std::size_t i) {
    return std::min(n_out, static_cast<std::size_t>(std::llround(static_cast<double>(i) * ratio)));
  };
  std::vector<wfdb::RhythmInterval> out;
  for (const auto& r : in) {
    const std::size_t onset = map(r.onset);
    const std::size_t end = map(r.end);
    if (onset < end) out.push_back({onset, end, r.label});
  }
  return out;
}

CleanRecord preprocess_record(const wfdb::EcgRecord& record, kernels::ExecPolicy policy) {
  CleanRecord out;
  out.name = record.header.record_name;
  out.sampling_rate = dsp::kTargetRate;
  const double fs = record.header.sampling_rate;
  std::size_t n_out = 0;
  for (const auto& channel : record.channels) {
    const auto flat = dsp::remove_baseline(channel, fs, policy);
    const auto resampled = dsp::resample(flat, fs, dsp::kTargetRate, policy);
    const auto norm = dsp::normalize(resampled);
    out.channels.emplace_back(norm.begin(), norm.end());
    n_out = norm.size();
  }
  out.rhythms = rescale_intervals(record.rhythms, fs, dsp::kTargetRate, n_out);
  return out;
}

void save_clean_record(const CleanRecord& record, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream meta;
  meta << "version=" << kRecordFormatVersion << '\n'
       << "name=" << record.name << '\n'
       << "sampling_rate=" << record.sampling_rate << '\n'
       << "n_samples=" << record.n_samples() << '\n'
       << "n_channels=" << record.channels.size() << '\n';
  for (const auto& r : record.rhythms) {
    meta << "interval=" << r.onset << ',' << r.end << ',' << class_name(r.label) << '\n';
  }
  io::write_text(dir / (record.name + ".rec"), meta.str());

  std::vector<std::uint8_t> bytes;
  bytes.reserve(record.channels.size() * record.n_samples() * 4);
  for (const auto& ch : record.channels) {
    const auto enc = io::encode_f32(ch);
    bytes.insert(bytes.end(), enc.begin(), enc.end());
  }
  io::write_bytes(dir / (record.name + ".f32"), bytes);
}

CleanRecord load_clean_record(const std::filesystem::path& dir, const std::string& name) {
  const auto meta_path = dir / (name + ".rec");
  const auto kv = io::parse_key_values(io::read_text(meta_path));
  const std::string where = meta_path.string();
  if (io::require_key(kv, "version", where) != kRecordFormatVersion) {
    throw ParseError(where + ": unsupported record container version");
  }
  CleanRecord rec;
  rec.name = io::require_key(kv, "name", where);
  rec.sampling_rate = std::stod(io::require_key(kv, "sampling_rate", where));
  const auto n = static_cast<std::size_t>(std::stoull(io::require_key(kv, "n_samples", where)));
  const auto nch = static_cast<std::size_t>(std::stoull(io::require_key(kv, "n_channels", where)));

  const auto [lo, hi] = kv.equal_range("interval");
  for (auto it = lo; it != hi; ++it) {
    std::istringstream in(it->second);
    std::string onset, end, label;
    if (!std::getline(in, onset, ',') || !std::getline(in, end, ',') || !std::getline(in, label)) {
      throw ParseError(where + ": malformed interval '" + it->second + "'");
    }
    const auto cls = class_from_name(label);
    rec.rhythms.push_back({std::stoull(onset), std::stoull(end), cls.value_or(RhythmClass::Other)});
  }

  const auto bytes = io::read_bytes(dir / (name + ".f32"));
  if (bytes.size() != n * nch * 4) {
    throw ParseError(where + ": sample file holds " + std::to_string(bytes.size()) +
                     " bytes, expected " + std::to_string(n * nch * 4));
  }
  const auto values = io::decode_f32(bytes);
  for (std::size_t c = 0; c < nch; ++c) {
    rec.channels.emplace_back(values.begin() + static_cast<std::ptrdiff_t>(c * n),
                              values.begin() + static_cast<std::ptrdiff_t>((c + 1) * n));
  }
  return rec;
}

std::vector<std::string> list_clean_records(const std::filesystem::path& dir) {
  std::vector<std::string> names;
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".rec") names.push_back(entry.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace ecglite
