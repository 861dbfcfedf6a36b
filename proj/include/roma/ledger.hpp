#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "roma/crypto.hpp"
#include "roma/traits.hpp"

namespace roma::ledger {

using Json = nlohmann::json;

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::string_view kMagic = "ROMA-LEDGER\n";  // 12 bytes
inline constexpr std::size_t kHeaderSize = 16;               // magic + u32 version

// Key-sorted, whitespace-free. Throws Error(kSerializationFailure) on
// non-finite numbers.
std::string canonical(const Json& value);

struct LedgerEntry {
  std::uint64_t seq = 0;
  Timestamp created_at = 0;
  std::string kind;
  std::string payload;  // canonical {"at","data","kind","v"}
  crypto::Digest payload_digest{};
  crypto::Digest prev_digest{};
  crypto::Digest chain_digest{};

  Json data() const;  // the "data" member of the payload
};

// hash(prev ‖ payload_digest ‖ seq as u64 big-endian)
crypto::Digest chain_digest(const crypto::Digest& prev, const crypto::Digest& payload_digest,
                            std::uint64_t seq);

std::string make_payload(std::string_view kind, Timestamp at, const Json& data);

// Record body without the length prefix.
std::string encode_record(const LedgerEntry& e);

struct VerifyResult {
  bool ok = true;
  std::optional<std::uint64_t> first_bad_seq;
  std::uint64_t entries = 0;  // entries that verified before the first failure
  crypto::Digest head{};      // chain digest of the last good entry
  std::string reason;
};

// Recomputes every digest from genesis up to `to` (or the end). A failure
// before `from` is still reported since it breaks the chain for the range.
VerifyResult verify_file(const std::filesystem::path& path, std::uint64_t from = 1,
                         std::optional<std::uint64_t> to = std::nullopt);

// Reads complete records without verifying digests. Throws Error(kFormatError).
std::vector<LedgerEntry> read_file(const std::filesystem::path& path);

// Single writer. Appends are serialized and fsynced before returning.
class Ledger {
 public:
  // Creates the file when missing. A torn trailing record left by a crash
  // during append is truncated away; any other damage throws
  // Error(kChecksumMismatch).
  explicit Ledger(std::filesystem::path path);
  ~Ledger();
  Ledger(const Ledger&) = delete;
  Ledger& operator=(const Ledger&) = delete;

  // Throws Error(kSerializationFailure) or Error(kStorageFailure).
  LedgerEntry append(std::string_view kind, Timestamp at, const Json& data);

  std::uint64_t size() const;
  crypto::Digest head() const;
  const std::filesystem::path& path() const noexcept;
  bool repaired_on_open() const noexcept;

  std::vector<LedgerEntry> entries(std::uint64_t from = 1,
                                   std::optional<std::uint64_t> to = std::nullopt) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

inline constexpr std::size_t kMemoBudget = 566;
inline constexpr std::string_view kMemoTag = "RM1";

// One memo: "RM1|<seq>|<i>/<n>|" then, on the first memo only,
// "<chain digest hex>|", then a UTF-8-safe slice of the payload.
struct Memo {
  std::uint64_t seq = 0;
  std::size_t index = 1;
  std::size_t count = 1;
  std::string text;
};

struct EntryExport {
  std::uint64_t seq = 0;
  std::string kind;
  crypto::Digest payload_digest{};
  crypto::Digest prev_digest{};
  crypto::Digest chain_digest{};
  std::vector<Memo> memos;

  Json to_json() const;
  static EntryExport from_json(const Json& j);
};

struct AnchorExport {
  std::uint64_t seq_from = 0;
  std::uint64_t seq_to = 0;
  std::string hash = std::string(crypto::kHashName);
  std::optional<crypto::Digest> head;  // chain digest at seq_to
  std::vector<EntryExport> entries;

  // One JSON document per line: a header line, then one line per entry.
  std::string to_jsonl() const;
  static AnchorExport from_jsonl(std::string_view text);
};

std::vector<Memo> split_memos(const LedgerEntry& e, std::size_t budget = kMemoBudget);

struct Reassembled {
  std::uint64_t seq = 0;
  crypto::Digest chain_digest{};
  std::string payload;
};

// Throws Error(kFormatError) on missing, duplicated or inconsistent parts.
Reassembled reassemble(std::vector<Memo> memos);

// Throws Error(kUnverifiedRange) when the range does not verify. An empty
// range (from > to, or past the end) yields an empty export.
AnchorExport export_memos(const std::filesystem::path& path, std::uint64_t from = 1,
                          std::optional<std::uint64_t> to = std::nullopt);

}  // namespace roma::ledger
