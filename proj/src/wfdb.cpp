#include "ecglite/wfdb.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <fstream>
#include <sstream>

#include "ecglite/error.hpp"

namespace ecglite::wfdb {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename Number>
std::optional<Number> parse_number(std::string_view s) {
  Number value{};
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return value;
}

/// Leading numeric part of a token such as "360/1(0)" or "200(0)/mV".
std::string_view numeric_prefix(std::string_view s) {
  const auto stop = s.find_first_of("/(:x+");
  return s.substr(0, stop);
}

template <typename Number>
Number require_number(std::string_view token, std::string_view what, std::size_t line) {
  auto v = parse_number<Number>(token);
  if (!v) throw ParseError("invalid " + std::string(what) + " '" + std::string(token) + "'", line);
  return *v;
}

SignalSpec parse_signal_line(const std::vector<std::string_view>& tok, std::size_t line) {
  if (tok.size() < 2) throw ParseError("signal line needs at least a file name and format", line);
  SignalSpec s;
  s.file_name = std::string(tok[0]);

  const std::string_view fmt_tok = tok[1];
  const std::string_view fmt_digits = numeric_prefix(fmt_tok);
  s.format = require_number<int>(fmt_digits, "storage format", line);
  if (fmt_digits.size() != fmt_tok.size()) {
    throw ParseError("signal modifiers in '" + std::string(fmt_tok) + "' are not supported", line);
  }
  if (s.format != 212 && s.format != 16) throw UnsupportedFormatError(s.format, line);

  bool have_baseline = false;
  if (tok.size() > 2) {
    const std::string_view g = tok[2];
    s.gain = require_number<double>(numeric_prefix(g), "gain", line);
    if (const auto open = g.find('('); open != std::string_view::npos) {
      const auto close = g.find(')', open);
      if (close == std::string_view::npos) throw ParseError("unterminated baseline in gain field", line);
      s.baseline = require_number<int>(g.substr(open + 1, close - open - 1), "baseline", line);
      have_baseline = true;
    }
  }
  if (!(s.gain > 0.0)) s.gain = kDefaultGain;
  if (tok.size() > 3) s.adc_resolution = require_number<int>(tok[3], "ADC resolution", line);
  if (tok.size() > 4) s.adc_zero = require_number<int>(tok[4], "ADC zero", line);
  if (!have_baseline) s.baseline = s.adc_zero;
  // tok[5..7]: initial value, checksum, block size; not needed for decoding.
  for (std::size_t i = 8; i < tok.size(); ++i) {
    if (!s.description.empty()) s.description += ' ';
    s.description += tok[i];
  }
  return s;
}

std::uint16_t read_word(std::span<const std::uint8_t> bytes, std::size_t pos) {
  return static_cast<std::uint16_t>(bytes[pos] | (bytes[pos + 1] << 8));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void put_word(std::vector<std::uint8_t>& out, std::uint16_t w) {
  out.push_back(static_cast<std::uint8_t>(w & 0xFF));
  out.push_back(static_cast<std::uint8_t>(w >> 8));
}

}  // namespace

RecordHeader parse_header(std::string_view text) {
  RecordHeader h;
  bool have_record_line = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const auto tok = split_ws(line);
    if (tok.empty() || tok[0].front() == '#') continue;

    if (!have_record_line) {
      if (tok.size() < 4) {
        throw ParseError("record line needs name, signal count, sampling rate and sample count",
                         line_no);
      }
      if (tok[0].find('/') != std::string_view::npos) {
        throw ParseError("multi-segment records are not supported", line_no);
      }
      h.record_name = std::string(tok[0]);
      const int nsig = require_number<int>(tok[1], "signal count", line_no);
      if (nsig < 1) throw ParseError("signal count must be at least 1", line_no);
      h.n_signals = static_cast<std::size_t>(nsig);
      h.sampling_rate = require_number<double>(numeric_prefix(tok[2]), "sampling rate", line_no);
      if (!(h.sampling_rate > 0.0)) throw ParseError("sampling rate must be positive", line_no);
      const long long n = require_number<long long>(tok[3], "sample count", line_no);
      if (n < 0) throw ParseError("sample count must be non-negative", line_no);
      h.n_samples = static_cast<std::size_t>(n);
      have_record_line = true;
      continue;
    }
    if (h.signals.size() == h.n_signals) continue;  // trailing info lines
    h.signals.push_back(parse_signal_line(tok, line_no));
  }
  if (!have_record_line) throw ParseError("empty header");
  if (h.signals.size() != h.n_signals) {
    throw ParseError("header declares " + std::to_string(h.n_signals) + " signals but lists " +
                     std::to_string(h.signals.size()));
  }
  return h;
}

std::vector<std::vector<int>> read_raw_signal(const RecordHeader& header,
                                              std::span<const std::uint8_t> bytes) {
  if (header.signals.empty()) throw ArgumentError("header has no signals");
  const int format = header.signals.front().format;
  for (const auto& s : header.signals) {
    if (s.format != format) throw ParseError("mixed storage formats in one record");
    if (s.file_name != header.signals.front().file_name) {
      throw ParseError("signals split across several files are not supported");
    }
  }
  const std::size_t nsig = header.n_signals;
  const std::size_t total = header.n_samples * nsig;
  std::size_t expected = 0;
  if (format == 212) {
    expected = total / 2 * 3 + (total % 2 ? 2 : 0);
  } else if (format == 16) {
    expected = total * 2;
  } else {
    throw UnsupportedFormatError(format);
  }
  if (bytes.size() < expected) {
    throw ParseError("truncated signal file: expected " + std::to_string(expected) +
                     " bytes, got " + std::to_string(bytes.size()));
  }

  std::vector<std::vector<int>> channels(nsig, std::vector<int>(header.n_samples));
  auto store = [&](std::size_t k, int value) { channels[k % nsig][k / nsig] = value; };

  if (format == 212) {
    std::size_t k = 0;
    for (std::size_t p = 0; k < total; p += 3) {
      int s1 = bytes[p] | ((bytes[p + 1] & 0x0F) << 8);
      if (s1 & 0x800) s1 -= 0x1000;
      store(k++, s1);
      if (k == total) break;
      int s2 = bytes[p + 2] | ((bytes[p + 1] & 0xF0) << 4);
      if (s2 & 0x800) s2 -= 0x1000;
      store(k++, s2);
    }
  } else {
    for (std::size_t k = 0; k < total; ++k) {
      store(k, static_cast<std::int16_t>(read_word(bytes, 2 * k)));
    }
  }
  return channels;
}

std::vector<std::vector<double>> read_signal(const RecordHeader& header,
                                             std::span<const std::uint8_t> bytes) {
  const auto raw = read_raw_signal(header, bytes);
  std::vector<std::vector<double>> out(raw.size());
  for (std::size_t c = 0; c < raw.size(); ++c) {
    const auto& spec = header.signals[c];
    out[c].resize(raw[c].size());
    std::transform(raw[c].begin(), raw[c].end(), out[c].begin(),
                   [&](int v) { return (v - spec.baseline) / spec.gain; });
  }
  return out;
}

std::vector<Annotation> read_annotations(std::span<const std::uint8_t> bytes,
                                         std::size_t n_samples) {
  std::vector<Annotation> out;
  long long time = 0;
  std::size_t pos = 0;
  while (pos + 2 <= bytes.size()) {
    const std::uint16_t word = read_word(bytes, pos);
    pos += 2;
    if (word == 0) break;
    const int type = word >> 10;
    const int data = word & 0x3FF;

    switch (type) {
      case code::kSkip: {
        if (pos + 4 > bytes.size()) throw ParseError("truncated SKIP interval");
        const std::uint32_t hi = read_word(bytes, pos);
        const std::uint32_t lo = read_word(bytes, pos + 2);
        pos += 4;
        time += static_cast<std::int32_t>((hi << 16) | lo);
        if (time < 0) throw ParseError("SKIP moves annotation time before record start");
        break;
      }
      case code::kNum:
      case code::kSubtype:
      case code::kChannel:
        break;
      case code::kAux: {
        if (out.empty()) throw ParseError("aux block without a preceding annotation");
        const std::size_t len = static_cast<std::size_t>(data);
        if (pos + len > bytes.size()) throw ParseError("dangling aux bytes");
        std::string aux(reinterpret_cast<const char*>(bytes.data() + pos), len);
        while (!aux.empty() && aux.back() == '\0') aux.pop_back();
        out.back().aux = std::move(aux);
        pos += (len + 1) & ~std::size_t{1};
        break;
      }
      default: {
        time += data;
        if (static_cast<std::size_t>(time) > n_samples) {
          throw ParseError("annotation time " + std::to_string(time) + " exceeds record length " +
                           std::to_string(n_samples));
        }
        out.push_back({static_cast<std::size_t>(time), type, std::nullopt});
        break;
      }
    }
  }
  return out;
}

std::vector<RhythmInterval> rhythm_intervals(std::span<const Annotation> annotations,
                                             std::size_t n_samples) {
  struct Change {
    std::size_t time;
    RhythmClass label;
  };
  std::vector<Change> changes;
  for (const auto& a : annotations) {
    if (a.type != code::kRhythm || !a.aux || a.aux->empty() || a.aux->front() != '(') continue;
    changes.push_back({a.time, class_from_aux(*a.aux)});
  }

  std::vector<RhythmInterval> out;
  for (std::size_t i = 0; i < changes.size(); ++i) {
    const std::size_t onset = changes[i].time;
    const std::size_t end = i + 1 < changes.size() ? changes[i + 1].time : n_samples;
    if (onset >= std::min(end, n_samples)) continue;
    out.push_back({onset, std::min(end, n_samples), changes[i].label});
  }
  return out;
}

ParseSummary summarize(const EcgRecord& record, std::span<const Annotation> annotations) {
  ParseSummary s;
  s.record_name = record.header.record_name;
  s.n_intervals = record.rhythms.size();
  for (const auto& r : record.rhythms) {
    s.samples_per_label[std::string(class_name(r.label))] += r.length();
  }
  for (const auto& a : annotations) {
    if (a.type == code::kRhythm && a.aux && !a.aux->empty() && a.aux->front() == '(' &&
        class_from_aux(*a.aux) == RhythmClass::Other) {
      ++s.unknown_rhythms[*a.aux];
    }
  }
  return s;
}

std::string format_summary(const ParseSummary& summary) {
  std::ostringstream os;
  os << "record " << summary.record_name << ": " << summary.n_intervals << " rhythm intervals\n";
  for (const auto& [label, n] : summary.samples_per_label) {
    os << "  " << label << ": " << n << " samples\n";
  }
  for (const auto& [aux, n] : summary.unknown_rhythms) {
    os << "  unmapped rhythm " << aux << " x" << n << " (counted as Other)\n";
  }
  return os.str();
}

LoadedRecord load_record(const std::filesystem::path& dir, const std::string& name,
                         const std::string& annotator) {
  const auto hea = read_file(dir / (name + ".hea"));
  EcgRecord rec;
  rec.header = parse_header(std::string_view(reinterpret_cast<const char*>(hea.data()), hea.size()));
  const auto dat = read_file(dir / rec.header.signals.front().file_name);
  rec.channels = read_signal(rec.header, dat);

  std::vector<Annotation> annotations;
  const auto atr_path = dir / (name + "." + annotator);
  if (std::filesystem::exists(atr_path)) {
    annotations = read_annotations(read_file(atr_path), rec.header.n_samples);
    std::stable_sort(annotations.begin(), annotations.end(),
                     [](const Annotation& a, const Annotation& b) { return a.time < b.time; });
    rec.rhythms = rhythm_intervals(annotations, rec.header.n_samples);
  }
  ParseSummary summary = summarize(rec, annotations);
  return {std::move(rec), std::move(summary)};
}

std::vector<std::uint8_t> encode_212(std::span<const int> interleaved) {
  std::vector<std::uint8_t> out;
  out.reserve(interleaved.size() * 3 / 2 + 2);
  for (std::size_t k = 0; k < interleaved.size(); k += 2) {
    const unsigned s1 = static_cast<unsigned>(interleaved[k]) & 0xFFF;
    const unsigned s2 = k + 1 < interleaved.size() ? static_cast<unsigned>(interleaved[k + 1]) & 0xFFF : 0;
    out.push_back(static_cast<std::uint8_t>(s1 & 0xFF));
    out.push_back(static_cast<std::uint8_t>(((s1 >> 8) & 0x0F) | ((s2 >> 4) & 0xF0)));
    if (k + 1 < interleaved.size()) out.push_back(static_cast<std::uint8_t>(s2 & 0xFF));
  }
  return out;
}

std::vector<std::uint8_t> encode_16(std::span<const int> interleaved) {
  std::vector<std::uint8_t> out;
  out.reserve(interleaved.size() * 2);
  for (int v : interleaved) put_word(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  return out;
}

std::vector<std::uint8_t> encode_annotations(std::span<const Annotation> annotations) {
  std::vector<std::uint8_t> out;
  std::size_t prev = 0;
  for (const auto& a : annotations) {
    if (a.time < prev) throw ArgumentError("annotations must be sorted by time");
    const std::size_t delta = a.time - prev;
    prev = a.time;
    if (delta > 0x3FF) {
      put_word(out, static_cast<std::uint16_t>(code::kSkip << 10));
      const auto d = static_cast<std::uint32_t>(delta);
      put_word(out, static_cast<std::uint16_t>(d >> 16));
      put_word(out, static_cast<std::uint16_t>(d & 0xFFFF));
      put_word(out, static_cast<std::uint16_t>(a.type << 10));
    } else {
      put_word(out, static_cast<std::uint16_t>((a.type << 10) | delta));
    }
    if (a.aux) {
      const std::size_t len = a.aux->size();
      if (len > 0x3FF) throw ArgumentError("aux string too long");
      put_word(out, static_cast<std::uint16_t>((code::kAux << 10) | len));
      out.insert(out.end(), a.aux->begin(), a.aux->end());
      if (len % 2) out.push_back(0);
    }
  }
  put_word(out, 0);
  return out;
}

std::string format_header(const RecordHeader& header) {
  std::ostringstream os;
  os << header.record_name << ' ' << header.n_signals << ' ' << header.sampling_rate << ' '
     << header.n_samples << '\n';
  for (const auto& s : header.signals) {
    os << s.file_name << ' ' << s.format << ' ' << s.gain;
    if (s.baseline != s.adc_zero) os << '(' << s.baseline << ')';
    os << "/mV " << s.adc_resolution << ' ' << s.adc_zero << " 0 0 0";
    if (!s.description.empty()) os << ' ' << s.description;
    os << '\n';
  }
  return os.str();
}

}  // namespace ecglite::wfdb
