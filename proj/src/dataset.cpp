#include "ecglite/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "ecglite/error.hpp"
#include "io_util.hpp"

namespace ecglite::dataset {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename Range, typename Fn>
std::string join(const Range& r, Fn fn) {
  std::string out;
  for (const auto& v : r) {
    if (!out.empty()) out += ',';
    out += fn(v);
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

std::vector<Segment> segment_record(const CleanRecord& record, std::size_t lead,
                                    std::size_t window, std::size_t stride) {
  if (stride == 0) throw ArgumentError("stride must be at least 1");
  if (window == 0) throw ArgumentError("window must be at least 1");
  if (lead >= record.channels.size()) {
    throw ArgumentError("lead " + std::to_string(lead) + " out of range for record " + record.name);
  }
  const auto& channel = record.channels[lead];
  std::vector<Segment> out;
  for (const auto& interval : record.rhythms) {
    if (interval.label == RhythmClass::Other) continue;
    const std::size_t end = std::min(interval.end, channel.size());
    for (std::size_t s = interval.onset; s + window <= end; s += stride) {
      Segment seg;
      seg.samples.assign(channel.begin() + static_cast<std::ptrdiff_t>(s),
                         channel.begin() + static_cast<std::ptrdiff_t>(s + window));
      seg.label = interval.label;
      seg.source = {record.name, s};
      out.push_back(std::move(seg));
    }
  }
  return out;
}

std::vector<Segment> cap_class(std::vector<Segment> segments, RhythmClass cls, std::size_t cap,
                               Rng& rng) {
  if (cap == 0) throw ArgumentError("cap must be at least 1");
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].label == cls) members.push_back(i);
  }
  if (members.size() <= cap) return segments;

  // Partial Fisher-Yates: the first `cap` slots become a uniform sample.
  for (std::size_t i = 0; i < cap; ++i) {
    const std::size_t j = i + rng.below(members.size() - i);
    std::swap(members[i], members[j]);
  }
  std::vector<bool> drop(segments.size(), false);
  for (std::size_t i = cap; i < members.size(); ++i) drop[members[i]] = true;

  std::vector<Segment> kept;
  kept.reserve(segments.size() - (members.size() - cap));
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (!drop[i]) kept.push_back(std::move(segments[i]));
  }
  return kept;
}

std::vector<Segment> cap_class(std::vector<Segment> segments, RhythmClass cls, std::size_t cap,
                               std::uint64_t seed) {
  Rng rng(seed);
  return cap_class(std::move(segments), cls, cap, rng);
}

ClassCounts count_classes(std::span<const Segment> segments) {
  ClassCounts counts{};
  for (const auto& s : segments) {
    if (s.label != RhythmClass::Other) ++counts[class_index(s.label)];
  }
  return counts;
}

ClassCounts count_classes(std::span<const RhythmClass> labels) {
  ClassCounts counts{};
  for (RhythmClass c : labels) {
    if (c != RhythmClass::Other) ++counts[class_index(c)];
  }
  return counts;
}

ClassWeights class_weights(const ClassCounts& counts) {
  const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (total == 0) throw ArgumentError("class_weights: all class counts are zero");
  ClassWeights w{};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    w[c] = counts[c] ? static_cast<double>(total) / (static_cast<double>(kNumClasses) *
                                                     static_cast<double>(counts[c]))
                     : 0.0;
  }
  return w;
}

Split split(std::size_t n, double train_fraction, Rng& rng) {
  if (n < 2) throw ArgumentError("split needs at least 2 segments, got " + std::to_string(n));
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ArgumentError("train fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(perm.begin(), perm.end());
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  Split out;
  out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

Split split(std::size_t n, double train_fraction, std::uint64_t seed) {
  Rng rng(seed);
  return split(n, train_fraction, rng);
}

Split split_by_record(std::span<const SegmentSource> sources, double train_fraction, Rng& rng) {
  const std::size_t n = sources.size();
  if (n < 2) throw ArgumentError("split needs at least 2 segments, got " + std::to_string(n));
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ArgumentError("train fraction must lie in (0, 1)");
  }
  std::map<std::string, std::vector<std::size_t>> by_record;
  for (std::size_t i = 0; i < n; ++i) by_record[sources[i].record].push_back(i);
  std::vector<const std::vector<std::size_t>*> groups;
  for (const auto& [name, idx] : by_record) groups.push_back(&idx);
  rng.shuffle(groups.begin(), groups.end());

  const auto target = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  Split out;
  for (const auto* g : groups) {
    auto& side = out.train.size() < target ? out.train : out.test;
    side.insert(side.end(), g->begin(), g->end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::array<float, kNumClasses> one_hot(RhythmClass label) {
  if (label == RhythmClass::Other) throw ArgumentError("one_hot: label outside the nine classes");
  std::array<float, kNumClasses> v{};
  v[class_index(label)] = 1.0f;
  return v;
}

std::vector<std::size_t> SegmentSet::indices(bool train) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < is_train.size(); ++i) {
    if ((is_train[i] != 0) == train) out.push_back(i);
  }
  return out;
}

SegmentSet from_segments(std::vector<Segment> segments, const BuildOptions& options) {
  Rng rng(options.seed);
  for (RhythmClass c : kAllClasses) segments = cap_class(std::move(segments), c, options.cap, rng);

  SegmentSet set;
  set.options = options;
  set.class_counts = count_classes(segments);
  set.class_weights = class_weights(set.class_counts);
  set.samples.reserve(segments.size() * options.window);
  for (auto& s : segments) {
    if (s.samples.size() != options.window) throw ShapeError("segment length mismatch");
    set.samples.insert(set.samples.end(), s.samples.begin(), s.samples.end());
    set.labels.push_back(s.label);
    set.sources.push_back(std::move(s.source));
  }

  const Split parts = options.split_mode == SplitMode::kRecord
                          ? split_by_record(set.sources, options.train_fraction, rng)
                          : split(set.size(), options.train_fraction, rng);
  set.is_train.assign(set.size(), 0);
  for (std::size_t i : parts.train) set.is_train[i] = 1;
  return set;
}

SegmentSet build_segment_set(std::span<const CleanRecord> records, const BuildOptions& options) {
  std::vector<Segment> all;
  for (const auto& rec : records) {
    auto segs = segment_record(rec, options.lead, options.window, options.stride);
    std::move(segs.begin(), segs.end(), std::back_inserter(all));
  }
  if (all.empty()) throw ArgumentError("no segments could be cut from the given records");
  return from_segments(std::move(all), options);
}

void save_segment_set(const SegmentSet& set, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& o = set.options;
  std::ostringstream m;
  m << "version=" << kFormatVersion << '\n'
    << "n_segments=" << set.size() << '\n'
    << "window=" << o.window << '\n'
    << "lead=" << o.lead << '\n'
    << "stride=" << o.stride << '\n'
    << "cap=" << o.cap << '\n'
    << "seed=" << o.seed << '\n'
    << "train_fraction=" << format_double(o.train_fraction) << '\n'
    << "split_mode=" << (o.split_mode == SplitMode::kRecord ? "record" : "segment") << '\n'
    << "class_order=" << join(kAllClasses, [](RhythmClass c) { return std::string(class_name(c)); }) << '\n'
    << "counts=" << join(set.class_counts, [](std::size_t v) { return std::to_string(v); }) << '\n'
    << "weights=" << join(set.class_weights, format_double) << '\n'
    << "n_train=" << std::count(set.is_train.begin(), set.is_train.end(), 1) << '\n';
  io::write_text(dir / "manifest.txt", m.str());
  io::write_bytes(dir / "segments.f32", io::encode_f32(set.samples));

  std::vector<std::uint8_t> labels(set.size());
  std::transform(set.labels.begin(), set.labels.end(), labels.begin(),
                 [](RhythmClass c) { return static_cast<std::uint8_t>(class_index(c)); });
  io::write_bytes(dir / "labels.u8", labels);
  io::write_bytes(dir / "split.u8", set.is_train);

  std::ostringstream src;
  src << "record,onset\n";
  for (const auto& s : set.sources) src << s.record << ',' << s.onset << '\n';
  io::write_text(dir / "sources.csv", src.str());
}

SegmentSet load_segment_set(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.txt";
  if (!std::filesystem::exists(manifest_path)) {
    throw IoError("dataset manifest not found: " + manifest_path.string());
  }
  const auto kv = io::parse_key_values(io::read_text(manifest_path));
  const std::string where = manifest_path.string();
  if (io::require_key(kv, "version", where) != kFormatVersion) {
    throw ParseError(where + ": unsupported dataset version");
  }
  const auto names = split_csv(io::require_key(kv, "class_order", where));
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (names.size() != kNumClasses || names[c] != class_name(kAllClasses[c])) {
      throw ParseError(where + ": unexpected class order");
    }
  }

  SegmentSet set;
  auto& o = set.options;
  const auto n = static_cast<std::size_t>(std::stoull(io::require_key(kv, "n_segments", where)));
  o.window = std::stoull(io::require_key(kv, "window", where));
  o.lead = std::stoull(io::require_key(kv, "lead", where));
  o.stride = std::stoull(io::require_key(kv, "stride", where));
  o.cap = std::stoull(io::require_key(kv, "cap", where));
  o.seed = std::stoull(io::require_key(kv, "seed", where));
  o.train_fraction = std::stod(io::require_key(kv, "train_fraction", where));
  o.split_mode = io::require_key(kv, "split_mode", where) == "record" ? SplitMode::kRecord
                                                                      : SplitMode::kSegment;

  const auto sample_bytes = io::read_bytes(dir / "segments.f32");
  if (sample_bytes.size() != n * o.window * 4) {
    throw ParseError(where + ": segments.f32 holds " + std::to_string(sample_bytes.size()) +
                     " bytes, expected " + std::to_string(n * o.window * 4));
  }
  set.samples = io::decode_f32(sample_bytes);

  const auto labels = io::read_bytes(dir / "labels.u8");
  set.is_train = io::read_bytes(dir / "split.u8");
  if (labels.size() != n || set.is_train.size() != n) {
    throw ParseError(where + ": label/split file length does not match n_segments");
  }
  for (std::uint8_t l : labels) {
    if (l >= kNumClasses) throw ParseError(where + ": label byte out of range");
    set.labels.push_back(kAllClasses[l]);
  }

  std::istringstream src(io::read_text(dir / "sources.csv"));
  std::string line;
  std::getline(src, line);  // header
  while (std::getline(src, line)) {
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) throw ParseError("sources.csv: malformed line");
    set.sources.push_back({line.substr(0, comma), std::stoull(line.substr(comma + 1))});
  }
  if (set.sources.size() != n) throw ParseError("sources.csv: row count does not match n_segments");

  set.class_counts = count_classes(set.labels);
  const auto stored = split_csv(io::require_key(kv, "counts", where));
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (stored.size() != kNumClasses || std::stoull(stored[c]) != set.class_counts[c]) {
      throw ParseError(where + ": class counts disagree with labels.u8");
    }
  }
  set.class_weights = class_weights(set.class_counts);
  return set;
}

}  // namespace ecglite::dataset
