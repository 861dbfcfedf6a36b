#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace roma {

// Big Five trait axes, in the fixed O, C, E, A, N order used everywhere.
enum class Trait : std::size_t {
  kOpenness = 0,
  kConscientiousness = 1,
  kExtraversion = 2,
  kAgreeableness = 3,
  kNeuroticism = 4,
};

inline constexpr std::size_t kTraitCount = 5;
inline constexpr std::array<Trait, kTraitCount> kAllTraits = {
    Trait::kOpenness, Trait::kConscientiousness, Trait::kExtraversion,
    Trait::kAgreeableness, Trait::kNeuroticism};

using TraitVector = std::array<double, kTraitCount>;
// Standardized trait vector (one entry per trait, in SD units).
using ZVector = std::array<double, kTraitCount>;

constexpr std::size_t index(Trait t) noexcept {
  return static_cast<std::size_t>(t);
}

std::string_view trait_letter(Trait t) noexcept;
std::string_view trait_name(Trait t) noexcept;
std::optional<Trait> parse_trait(std::string_view text) noexcept;

// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

}  // namespace roma
