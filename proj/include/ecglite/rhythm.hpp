#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace ecglite {

/// The nine rhythm classes, in canonical (table) order. `Other` collects
/// every annotated rhythm outside that set and never reaches the model.
enum class RhythmClass : std::uint8_t { AFIB, AFL, B, N, P, PREX, SVTA, T, VT, Other };

inline constexpr std::size_t kNumClasses = 9;

inline constexpr std::array<RhythmClass, kNumClasses> kAllClasses = {
    RhythmClass::AFIB, RhythmClass::AFL,  RhythmClass::B, RhythmClass::N, RhythmClass::P,
    RhythmClass::PREX, RhythmClass::SVTA, RhythmClass::T, RhythmClass::VT};

constexpr std::string_view class_name(RhythmClass c) {
  constexpr std::array<std::string_view, kNumClasses + 1> names = {
      "AFIB", "AFL", "B", "N", "P", "PREX", "SVTA", "T", "VT", "Other"};
  return names[static_cast<std::size_t>(c)];
}

/// Annotation aux string, e.g. "(AFIB". Empty for Other.
constexpr std::string_view aux_string(RhythmClass c) {
  constexpr std::array<std::string_view, kNumClasses + 1> aux = {
      "(AFIB", "(AFL", "(B", "(N", "(P", "(PREX", "(SVTA", "(T", "(VT", ""};
  return aux[static_cast<std::size_t>(c)];
}

constexpr std::size_t class_index(RhythmClass c) { return static_cast<std::size_t>(c); }

/// Maps an aux string to its class; anything outside the nine is Other.
constexpr RhythmClass class_from_aux(std::string_view aux) {
  for (RhythmClass c : kAllClasses) {
    if (aux == aux_string(c)) return c;
  }
  return RhythmClass::Other;
}

constexpr std::optional<RhythmClass> class_from_name(std::string_view name) {
  for (RhythmClass c : kAllClasses) {
    if (name == class_name(c)) return c;
  }
  return std::nullopt;
}

}  // namespace ecglite
