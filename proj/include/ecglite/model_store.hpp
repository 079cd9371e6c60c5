#pragma once

// Binary model file:
//
//   "ECGM" | version u32 | body length u32 | body | crc32 u32
//
// body = input rank u32, input dims u32..., layer count u32, then per layer:
// kind u32, hyperparameter count u32, hyperparameters u32..., parameter
// count u32, and per parameter its rank u32, dims u32... and the float32
// values. Integers and floats are little-endian. The CRC-32 covers every
// byte before it. Optimizer state is not stored.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ecglite/error.hpp"
#include "ecglite/nn/model.hpp"

namespace ecglite::model_store {

inline constexpr std::uint32_t kFormatVersion = 1;

enum class ErrorKind {
  kIo,
  kBadMagic,
  kUnsupportedVersion,
  kChecksumMismatch,
  kUnexpectedEof,
  kMalformed,
  kArchitectureMismatch,
};

class ModelStoreError : public Error {
 public:
  ModelStoreError(ErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

std::vector<std::uint8_t> serialize(const nn::Model<float>& model);
nn::Model<float> deserialize(std::span<const std::uint8_t> bytes);

/// Writes atomically (temp file then rename). Returns the byte count.
std::size_t save(const nn::Model<float>& model, const std::filesystem::path& path);
nn::Model<float> load(const std::filesystem::path& path);

/// load() plus a check that the layer stack is the arrhythmia classifier.
nn::Model<float> load_arrhythmia(const std::filesystem::path& path);

}  // namespace ecglite::model_store
