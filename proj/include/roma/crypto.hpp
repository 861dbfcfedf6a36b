#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace roma::crypto {

inline constexpr std::string_view kHashName = "sha-256";

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> bytes);
Digest sha256(std::string_view bytes);

Digest hmac_sha256(std::string_view key, std::string_view message);

std::string to_hex(std::span<const std::uint8_t> bytes);
// Throws roma::Error(kFormatError) on malformed input.
Digest digest_from_hex(std::string_view hex);

// Hex of `bytes` bytes from the system CSPRNG.
std::string random_hex(std::size_t bytes);

}  // namespace roma::crypto
