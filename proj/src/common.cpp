#include <cctype>
#include <vector>

#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>

#include "roma/crypto.hpp"
#include "roma/error.hpp"
#include "roma/traits.hpp"

namespace roma {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::kMissingItem: return "MissingItem";
    case ErrorCode::kDuplicateItem: return "DuplicateItem";
    case ErrorCode::kUnknownItem: return "UnknownItem";
    case ErrorCode::kOutOfScaleValue: return "OutOfScaleValue";
    case ErrorCode::kZeroVariance: return "ZeroVariance";
    case ErrorCode::kTooFewProfiles: return "TooFewProfiles";
    case ErrorCode::kInvalidK: return "InvalidK";
    case ErrorCode::kEmptyModel: return "EmptyModel";
    case ErrorCode::kUnclassifiedMember: return "UnclassifiedMember";
    case ErrorCode::kInfeasibleMatching: return "InfeasibleMatching";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kNoBaseline: return "NoBaseline";
    case ErrorCode::kDegenerateVariance: return "DegenerateVariance";
    case ErrorCode::kAllTied: return "AllTied";
    case ErrorCode::kZeroExpectedCell: return "ZeroExpectedCell";
    case ErrorCode::kZeroPooledSd: return "ZeroPooledSD";
    case ErrorCode::kSerializationFailure: return "SerializationFailure";
    case ErrorCode::kStorageFailure: return "StorageFailure";
    case ErrorCode::kUnverifiedRange: return "UnverifiedRange";
    case ErrorCode::kIncompleteAssessments: return "IncompleteAssessments";
    case ErrorCode::kNoData: return "NoData";
    case ErrorCode::kProjectOpen: return "ProjectOpen";
    case ErrorCode::kAnonymityThreshold: return "AnonymityThreshold";
    case ErrorCode::kUnknownAnchor: return "UnknownAnchor";
    case ErrorCode::kNoConsent: return "NoConsent";
    case ErrorCode::kConsentRevoked: return "ConsentRevoked";
    case ErrorCode::kUnknownInstrument: return "UnknownInstrument";
    case ErrorCode::kValidationFailure: return "ValidationFailure";
    case ErrorCode::kForbiddenPairIntroduced: return "ForbiddenPairIntroduced";
    case ErrorCode::kStaleProposal: return "StaleProposal";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kConflict: return "Conflict";
    case ErrorCode::kUnauthorized: return "Unauthorized";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

std::string_view trait_letter(Trait t) noexcept {
  static constexpr std::string_view kLetters[] = {"O", "C", "E", "A", "N"};
  return kLetters[index(t)];
}

std::string_view trait_name(Trait t) noexcept {
  static constexpr std::string_view kNames[] = {
      "openness", "conscientiousness", "extraversion", "agreeableness",
      "neuroticism"};
  return kNames[index(t)];
}

std::optional<Trait> parse_trait(std::string_view text) noexcept {
  for (Trait t : kAllTraits) {
    if (text == trait_letter(t) || text == trait_name(t)) return t;
  }
  return std::nullopt;
}

namespace crypto {

Digest sha256(std::span<const std::uint8_t> bytes) {
  Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(),
                 nullptr) != 1 ||
      len != out.size()) {
    throw Error(ErrorCode::kSerializationFailure, "sha-256 evaluation failed");
  }
  return out;
}

Digest sha256(std::string_view bytes) {
  return sha256(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

Digest hmac_sha256(std::string_view key, std::string_view message) {
  Digest out{};
  unsigned int len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
           reinterpret_cast<const unsigned char*>(message.data()),
           message.size(), out.data(), &len) == nullptr ||
      len != out.size()) {
    throw Error(ErrorCode::kSerializationFailure, "hmac-sha-256 failed");
  }
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

Digest digest_from_hex(std::string_view hex) {
  if (hex.size() != 64) {
    throw Error(ErrorCode::kFormatError, "digest must be 64 hex characters");
  }
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  Digest out{};
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      throw Error(ErrorCode::kFormatError, "invalid hex digit in digest");
    }
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

std::string random_hex(std::size_t bytes) {
  std::vector<std::uint8_t> buf(bytes);
  if (RAND_bytes(buf.data(), static_cast<int>(buf.size())) != 1) {
    throw Error(ErrorCode::kStorageFailure, "random generator failed");
  }
  return to_hex(buf);
}

}  // namespace crypto
}  // namespace roma
