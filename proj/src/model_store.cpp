#include "ecglite/model_store.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

#include "io_util.hpp"

namespace ecglite::model_store {

namespace {

constexpr char kMagic[4] = {'E', 'C', 'G', 'M'};
constexpr std::size_t kPrefix = 12;  // magic, version, body length

std::uint32_t crc(std::span<const std::uint8_t> bytes) {
  return static_cast<std::uint32_t>(
      ::crc32(::crc32(0L, Z_NULL, 0), bytes.data(), static_cast<uInt>(bytes.size())));
}

void put_shape(std::vector<std::uint8_t>& out, const nn::Shape& s) {
  io::put_u32(out, static_cast<std::uint32_t>(s.size()));
  for (auto d : s) io::put_u32(out, static_cast<std::uint32_t>(d));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}

  std::uint32_t u32() {
    need(4);
    const auto v = io::get_u32(bytes_.data() + pos_);
    pos_ += 4;
    return v;
  }
  nn::Shape shape() {
    const std::uint32_t rank = u32();
    if (rank > 8) throw ModelStoreError(ErrorKind::kMalformed, "implausible tensor rank " + std::to_string(rank));
    nn::Shape s(rank);
    for (auto& d : s) d = u32();
    return s;
  }
  void floats(std::span<float> out) {
    need(out.size() * 4);
    for (auto& v : out) {
      v = io::get_f32(bytes_.data() + pos_);
      pos_ += 4;
    }
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw ModelStoreError(ErrorKind::kUnexpectedEof, "unexpected end of file");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize(const nn::Model<float>& model) {
  std::vector<std::uint8_t> body;
  put_shape(body, model.input_shape());
  io::put_u32(body, static_cast<std::uint32_t>(model.size()));
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto& layer = model.layer(i);
    io::put_u32(body, static_cast<std::uint32_t>(layer.kind()));
    const auto hp = layer.hyperparameters();
    io::put_u32(body, static_cast<std::uint32_t>(hp.size()));
    for (auto h : hp) io::put_u32(body, h);
    const auto params = layer.parameters();
    io::put_u32(body, static_cast<std::uint32_t>(params.size()));
    for (const auto& p : params) {
      put_shape(body, p.value.shape());
      for (float v : p.value.data()) io::put_f32(body, v);
    }
  }

  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  io::put_u32(out, kFormatVersion);
  io::put_u32(out, static_cast<std::uint32_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
  io::put_u32(out, crc(out));
  return out;
}

nn::Model<float> deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw ModelStoreError(ErrorKind::kUnexpectedEof, "unexpected end of file");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw ModelStoreError(ErrorKind::kBadMagic, "bad magic");
  if (bytes.size() < kPrefix) throw ModelStoreError(ErrorKind::kUnexpectedEof, "unexpected end of file");
  const std::uint32_t version = io::get_u32(bytes.data() + 4);
  if (version != kFormatVersion) {
    throw ModelStoreError(ErrorKind::kUnsupportedVersion, "unsupported version " + std::to_string(version));
  }
  const std::size_t body_len = io::get_u32(bytes.data() + 8);
  const std::size_t expected = kPrefix + body_len + 4;
  if (bytes.size() < expected) throw ModelStoreError(ErrorKind::kUnexpectedEof, "unexpected end of file");
  if (bytes.size() > expected) {
    throw ModelStoreError(ErrorKind::kMalformed, std::to_string(bytes.size() - expected) + " trailing bytes");
  }
  const std::uint32_t stored = io::get_u32(bytes.data() + expected - 4);
  if (crc(bytes.first(expected - 4)) != stored) {
    throw ModelStoreError(ErrorKind::kChecksumMismatch, "checksum mismatch");
  }

  Reader r(bytes.subspan(kPrefix, body_len));
  nn::Model<float> model(r.shape());
  const std::uint32_t n_layers = r.u32();
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    const auto kind = static_cast<nn::LayerKind>(r.u32());
    std::vector<std::uint32_t> hp(r.u32());
    for (auto& h : hp) h = r.u32();
    std::unique_ptr<nn::Layer<float>> layer;
    try {
      layer = nn::make_layer<float>(kind, hp);
    } catch (const Error& e) {
      throw ModelStoreError(ErrorKind::kMalformed, "layer " + std::to_string(i) + ": " + e.what());
    }
    const std::uint32_t n_params = r.u32();
    auto params = layer->parameters();
    if (n_params != params.size()) {
      throw ModelStoreError(ErrorKind::kArchitectureMismatch,
                            "layer " + std::to_string(i) + " stores " + std::to_string(n_params) + " parameters");
    }
    for (auto& p : params) {
      const auto shape = r.shape();
      if (shape != p.value.shape()) {
        throw ModelStoreError(ErrorKind::kArchitectureMismatch, "layer " + std::to_string(i) + " parameter " +
                                                                    p.name + " has shape " + nn::to_string(shape));
      }
      r.floats(p.value.data());
    }
    model.add(std::move(layer));
  }
  if (!r.done()) throw ModelStoreError(ErrorKind::kMalformed, "unused bytes after the last layer");
  try {
    model.shape_trace();
  } catch (const Error& e) {
    throw ModelStoreError(ErrorKind::kArchitectureMismatch, e.what());
  }
  return model;
}

std::size_t save(const nn::Model<float>& model, const std::filesystem::path& path) {
  const auto bytes = serialize(model);
  auto tmp = path;
  tmp += ".tmp";
  try {
    io::write_bytes(tmp, bytes);
  } catch (const IoError& e) {
    throw ModelStoreError(ErrorKind::kIo, e.what());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ModelStoreError(ErrorKind::kIo, "cannot write " + path.string());
  }
  return bytes.size();
}

nn::Model<float> load(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = io::read_bytes(path);
  } catch (const IoError& e) {
    throw ModelStoreError(ErrorKind::kIo, e.what());
  }
  return deserialize(bytes);
}

nn::Model<float> load_arrhythmia(const std::filesystem::path& path) {
  auto m = load(path);
  if (!nn::is_arrhythmia_architecture(m)) {
    throw ModelStoreError(ErrorKind::kArchitectureMismatch, path.string() + " is not the arrhythmia classifier");
  }
  return m;
}

}  // namespace ecglite::model_store
