#include "roma/ledger.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <shared_mutex>
#include <sstream>

#include "roma/error.hpp"

namespace roma::ledger {
namespace {

constexpr std::size_t kDigestSize = 32;
constexpr int kPayloadVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_digest(std::string& out, const crypto::Digest& d) {
  out.append(reinterpret_cast<const char*>(d.data()), d.size());
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  std::size_t position() const noexcept { return pos_; }

  bool u16(std::uint16_t& v) { return uint(v, 2); }
  bool u32(std::uint32_t& v) { return uint(v, 4); }
  bool u64(std::uint64_t& v) { return uint(v, 8); }

  bool bytes(std::string& out, std::size_t n) {
    if (remaining() < n) return false;
    out.assign(bytes_.substr(pos_, n));
    pos_ += n;
    return true;
  }

  bool digest(crypto::Digest& d) {
    if (remaining() < kDigestSize) return false;
    std::memcpy(d.data(), bytes_.data() + pos_, kDigestSize);
    pos_ += kDigestSize;
    return true;
  }

 private:
  template <typename T>
  bool uint(T& v, int n) {
    if (remaining() < static_cast<std::size_t>(n)) return false;
    v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += n;
    return true;
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::string header_bytes() {
  std::string h(kMagic);
  put_u32(h, kFormatVersion);
  return h;
}

bool decode_record(std::string_view body, LedgerEntry& e) {
  Reader r(body);
  std::uint64_t at = 0;
  std::uint16_t kind_len = 0;
  std::uint32_t payload_len = 0;
  if (!r.u64(e.seq) || !r.u64(at) || !r.u16(kind_len) || !r.bytes(e.kind, kind_len) ||
      !r.u32(payload_len) || !r.bytes(e.payload, payload_len) || !r.digest(e.payload_digest) ||
      !r.digest(e.prev_digest) || !r.digest(e.chain_digest)) {
    return false;
  }
  e.created_at = static_cast<Timestamp>(at);
  return r.remaining() == 0;
}

struct Scan {
  std::vector<LedgerEntry> entries;
  bool header_ok = true;
  std::size_t good_bytes = 0;  // end offset of the last well-framed record
  bool torn = false;           // trailing bytes too short for the declared record
  bool malformed = false;      // a fully present record that does not decode
};

Scan scan(std::string_view bytes) {
  Scan s;
  if (bytes.empty()) return s;
  const std::string header = header_bytes();
  if (bytes.size() < kHeaderSize || bytes.substr(0, kHeaderSize) != header) {
    s.header_ok = false;
    return s;
  }
  std::size_t pos = kHeaderSize;
  s.good_bytes = pos;
  while (pos < bytes.size()) {
    Reader r(bytes.substr(pos));
    std::uint32_t len = 0;
    if (!r.u32(len) || r.remaining() < len) {
      s.torn = true;
      return s;
    }
    LedgerEntry e;
    if (!decode_record(bytes.substr(pos + 4, len), e)) {
      s.malformed = true;
      return s;
    }
    pos += 4 + len;
    s.good_bytes = pos;
    s.entries.push_back(std::move(e));
  }
  return s;
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kStorageFailure, "cannot open ledger " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_finite(const Json& v) {
  if (v.is_number_float() && !std::isfinite(v.get<double>())) {
    throw Error(ErrorCode::kSerializationFailure, "non-finite number in event");
  }
  if (v.is_structured()) {
    for (const auto& child : v) check_finite(child);
  }
}

// Empty string when the entry is consistent with its predecessor.
std::string entry_problem(const LedgerEntry& e, std::uint64_t expected_seq,
                          const crypto::Digest& prev) {
  if (e.seq != expected_seq) return "sequence gap";
  if (crypto::sha256(e.payload) != e.payload_digest) return "payload digest mismatch";
  if (e.prev_digest != prev) return "previous digest mismatch";
  if (chain_digest(e.prev_digest, e.payload_digest, e.seq) != e.chain_digest) {
    return "chain digest mismatch";
  }
  Json j = Json::parse(e.payload, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return "payload is not a JSON object";
  if (canonical(j) != e.payload) return "payload is not canonical";
  if (!j.contains("kind") || j["kind"] != e.kind) return "kind does not match payload";
  if (!j.contains("at") || !j["at"].is_number_integer() || j["at"].get<Timestamp>() != e.created_at) {
    return "timestamp does not match payload";
  }
  return {};
}

void write_fully(int fd, std::string_view bytes) {
  while (!bytes.empty()) {
    ssize_t n = ::write(fd, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kStorageFailure, std::string("ledger write failed: ") + std::strerror(errno));
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

void sync_fd(int fd) {
  if (::fsync(fd) != 0) {
    throw Error(ErrorCode::kStorageFailure, std::string("ledger fsync failed: ") + std::strerror(errno));
  }
}

void sync_parent(const std::filesystem::path& path) {
  auto dir = path.parent_path();
  if (dir.empty()) dir = ".";
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

std::string memo_prefix(std::uint64_t seq, std::size_t i, std::size_t n) {
  return std::string(kMemoTag) + "|" + std::to_string(seq) + "|" + std::to_string(i) + "/" +
         std::to_string(n) + "|";
}

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

std::vector<std::string> chunk_payload(std::string_view payload, std::size_t first_cap,
                                       std::size_t cap) {
  std::vector<std::string> chunks;
  std::size_t pos = 0;
  do {
    std::size_t limit = chunks.empty() ? first_cap : cap;
    std::size_t end = std::min(payload.size(), pos + limit);
    if (end < payload.size()) {
      while (end > pos && is_continuation(static_cast<unsigned char>(payload[end]))) --end;
      if (end == pos) throw Error(ErrorCode::kSerializationFailure, "memo budget too small");
    }
    chunks.emplace_back(payload.substr(pos, end - pos));
    pos = end;
  } while (pos < payload.size());
  return chunks;
}

std::uint64_t parse_u64(std::string_view s) {
  if (s.empty() || s.size() > 20) throw Error(ErrorCode::kFormatError, "bad number in memo");
  std::uint64_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') throw Error(ErrorCode::kFormatError, "bad number in memo");
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

struct ParsedMemo {
  std::uint64_t seq;
  std::size_t index;
  std::size_t count;
  std::optional<crypto::Digest> chain;
  std::string_view chunk;
};

ParsedMemo parse_memo(std::string_view text) {
  auto next_field = [&text]() {
    auto bar = text.find('|');
    if (bar == std::string_view::npos) throw Error(ErrorCode::kFormatError, "truncated memo");
    auto f = text.substr(0, bar);
    text.remove_prefix(bar + 1);
    return f;
  };
  if (next_field() != kMemoTag) throw Error(ErrorCode::kFormatError, "unknown memo tag");
  ParsedMemo m{};
  m.seq = parse_u64(next_field());
  auto part = next_field();
  auto slash = part.find('/');
  if (slash == std::string_view::npos) throw Error(ErrorCode::kFormatError, "bad memo part");
  m.index = parse_u64(part.substr(0, slash));
  m.count = parse_u64(part.substr(slash + 1));
  if (m.index < 1 || m.index > m.count) throw Error(ErrorCode::kFormatError, "bad memo part");
  if (m.index == 1) m.chain = crypto::digest_from_hex(next_field());
  m.chunk = text;
  return m;
}

}  // namespace

std::string canonical(const Json& value) {
  check_finite(value);
  try {
    return value.dump(-1, ' ', false, Json::error_handler_t::strict);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSerializationFailure, e.what());
  }
}

Json LedgerEntry::data() const {
  Json j = Json::parse(payload);
  return j.at("data");
}

crypto::Digest chain_digest(const crypto::Digest& prev, const crypto::Digest& payload_digest,
                            std::uint64_t seq) {
  std::string buf;
  buf.reserve(2 * kDigestSize + 8);
  put_digest(buf, prev);
  put_digest(buf, payload_digest);
  for (int i = 7; i >= 0; --i) buf.push_back(static_cast<char>((seq >> (8 * i)) & 0xff));
  return crypto::sha256(buf);
}

std::string make_payload(std::string_view kind, Timestamp at, const Json& data) {
  if (kind.empty() || kind.size() > 0xffff) {
    throw Error(ErrorCode::kSerializationFailure, "event kind must be 1..65535 bytes");
  }
  Json p = Json::object();
  p["v"] = kPayloadVersion;
  p["kind"] = std::string(kind);
  p["at"] = at;
  p["data"] = data;
  return canonical(p);
}

std::string encode_record(const LedgerEntry& e) {
  std::string body;
  body.reserve(e.kind.size() + e.payload.size() + 128);
  put_u64(body, e.seq);
  put_u64(body, static_cast<std::uint64_t>(e.created_at));
  put_u16(body, static_cast<std::uint16_t>(e.kind.size()));
  body += e.kind;
  put_u32(body, static_cast<std::uint32_t>(e.payload.size()));
  body += e.payload;
  put_digest(body, e.payload_digest);
  put_digest(body, e.prev_digest);
  put_digest(body, e.chain_digest);
  return body;
}

VerifyResult verify_file(const std::filesystem::path& path, std::uint64_t from,
                         std::optional<std::uint64_t> to) {
  VerifyResult res;
  (void)from;
  std::string bytes;
  try {
    bytes = read_all(path);
  } catch (const Error& e) {
    res.ok = false;
    res.first_bad_seq = 1;
    res.reason = e.what();
    return res;
  }
  Scan s = scan(bytes);
  if (!s.header_ok) {
    res.ok = false;
    res.first_bad_seq = 1;
    res.reason = "bad file header";
    return res;
  }
  crypto::Digest prev{};
  std::uint64_t expected = 1;
  for (const auto& e : s.entries) {
    if (to && expected > *to) return res;
    std::string problem = entry_problem(e, expected, prev);
    if (!problem.empty()) {
      res.ok = false;
      res.first_bad_seq = expected;
      res.reason = problem;
      return res;
    }
    prev = e.chain_digest;
    res.head = prev;
    ++res.entries;
    ++expected;
  }
  if (to && expected > *to) return res;
  if (s.torn || s.malformed) {
    res.ok = false;
    res.first_bad_seq = expected;
    res.reason = s.torn ? "torn record" : "malformed record";
  } else if (to && *to >= expected) {
    res.ok = false;
    res.first_bad_seq = expected;
    res.reason = "range extends past the end of the ledger";
  }
  return res;
}

std::vector<LedgerEntry> read_file(const std::filesystem::path& path) {
  Scan s = scan(read_all(path));
  if (!s.header_ok) throw Error(ErrorCode::kFormatError, "bad ledger header in " + path.string());
  if (s.torn || s.malformed) {
    throw Error(ErrorCode::kFormatError,
                "damaged record at seq " + std::to_string(s.entries.size() + 1));
  }
  return std::move(s.entries);
}

struct Ledger::Impl {
  std::filesystem::path path;
  int fd = -1;
  bool repaired = false;
  mutable std::shared_mutex mu;
  std::vector<LedgerEntry> entries;
  crypto::Digest head{};
};

Ledger::Ledger(std::filesystem::path path) : impl_(std::make_unique<Impl>()) {
  impl_->path = std::move(path);
  const bool existed = std::filesystem::exists(impl_->path);
  impl_->fd = ::open(impl_->path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (impl_->fd < 0) {
    throw Error(ErrorCode::kStorageFailure,
                "cannot open ledger " + impl_->path.string() + ": " + std::strerror(errno));
  }
  try {
    std::string bytes = existed ? read_all(impl_->path) : std::string();
    if (bytes.empty()) {
      write_fully(impl_->fd, header_bytes());
      sync_fd(impl_->fd);
      sync_parent(impl_->path);
      return;
    }
    Scan s = scan(bytes);
    if (!s.header_ok) throw Error(ErrorCode::kChecksumMismatch, "bad ledger header");
    if (s.malformed) {
      throw Error(ErrorCode::kChecksumMismatch,
                  "malformed record at seq " + std::to_string(s.entries.size() + 1));
    }
    crypto::Digest prev{};
    std::uint64_t expected = 1;
    for (const auto& e : s.entries) {
      std::string problem = entry_problem(e, expected, prev);
      if (!problem.empty()) {
        throw Error(ErrorCode::kChecksumMismatch,
                    "ledger entry " + std::to_string(expected) + ": " + problem);
      }
      prev = e.chain_digest;
      ++expected;
    }
    if (s.torn) {
      if (::ftruncate(impl_->fd, static_cast<off_t>(s.good_bytes)) != 0) {
        throw Error(ErrorCode::kStorageFailure, "cannot truncate torn ledger tail");
      }
      sync_fd(impl_->fd);
      impl_->repaired = true;
    }
    impl_->entries = std::move(s.entries);
    impl_->head = prev;
  } catch (...) {
    ::close(impl_->fd);
    throw;
  }
}

Ledger::~Ledger() {
  if (impl_ && impl_->fd >= 0) ::close(impl_->fd);
}

LedgerEntry Ledger::append(std::string_view kind, Timestamp at, const Json& data) {
  LedgerEntry e;
  e.kind = std::string(kind);
  e.created_at = at;
  e.payload = make_payload(kind, at, data);
  if (e.payload.size() > 0xffffff) throw Error(ErrorCode::kSerializationFailure, "event too large");
  e.payload_digest = crypto::sha256(e.payload);

  std::unique_lock lock(impl_->mu);
  e.seq = impl_->entries.size() + 1;
  e.prev_digest = impl_->head;
  e.chain_digest = chain_digest(e.prev_digest, e.payload_digest, e.seq);

  std::string body = encode_record(e);
  std::string framed;
  framed.reserve(body.size() + 4);
  put_u32(framed, static_cast<std::uint32_t>(body.size()));
  framed += body;

  off_t end = ::lseek(impl_->fd, 0, SEEK_END);
  if (end < 0) throw Error(ErrorCode::kStorageFailure, "ledger seek failed");
  try {
    write_fully(impl_->fd, framed);
    sync_fd(impl_->fd);
  } catch (...) {
    if (::ftruncate(impl_->fd, end) == 0) ::fsync(impl_->fd);
    throw;
  }
  impl_->entries.push_back(e);
  impl_->head = e.chain_digest;
  return e;
}

std::uint64_t Ledger::size() const {
  std::shared_lock lock(impl_->mu);
  return impl_->entries.size();
}

crypto::Digest Ledger::head() const {
  std::shared_lock lock(impl_->mu);
  return impl_->head;
}

const std::filesystem::path& Ledger::path() const noexcept { return impl_->path; }

bool Ledger::repaired_on_open() const noexcept { return impl_->repaired; }

std::vector<LedgerEntry> Ledger::entries(std::uint64_t from, std::optional<std::uint64_t> to) const {
  std::shared_lock lock(impl_->mu);
  std::uint64_t last = std::min<std::uint64_t>(to.value_or(impl_->entries.size()),
                                               impl_->entries.size());
  if (from < 1) from = 1;
  if (from > last) return {};
  return {impl_->entries.begin() + static_cast<std::ptrdiff_t>(from - 1),
          impl_->entries.begin() + static_cast<std::ptrdiff_t>(last)};
}

std::vector<Memo> split_memos(const LedgerEntry& e, std::size_t budget) {
  const std::size_t digest_field = 2 * kDigestSize + 1;
  std::size_t n = 1;
  for (;;) {
    std::string p1 = memo_prefix(e.seq, 1, n);
    std::string pn = memo_prefix(e.seq, n, n);
    if (p1.size() + digest_field >= budget || pn.size() >= budget) {
      throw Error(ErrorCode::kSerializationFailure, "memo budget too small");
    }
    auto chunks = chunk_payload(e.payload, budget - p1.size() - digest_field, budget - pn.size());
    if (chunks.size() != n) {
      n = chunks.size();
      continue;
    }
    std::vector<Memo> memos;
    memos.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) {
      Memo m{e.seq, i, n, memo_prefix(e.seq, i, n)};
      if (i == 1) m.text += crypto::to_hex(e.chain_digest) + "|";
      m.text += chunks[i - 1];
      memos.push_back(std::move(m));
    }
    return memos;
  }
}

Reassembled reassemble(std::vector<Memo> memos) {
  if (memos.empty()) throw Error(ErrorCode::kFormatError, "no memos");
  std::vector<ParsedMemo> parts;
  parts.reserve(memos.size());
  for (const auto& m : memos) parts.push_back(parse_memo(m.text));
  std::sort(parts.begin(), parts.end(),
            [](const ParsedMemo& a, const ParsedMemo& b) { return a.index < b.index; });
  Reassembled out;
  out.seq = parts.front().seq;
  const std::size_t n = parts.front().count;
  if (parts.size() != n) throw Error(ErrorCode::kFormatError, "memo count mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = parts[i];
    if (p.seq != out.seq || p.count != n || p.index != i + 1) {
      throw Error(ErrorCode::kFormatError, "inconsistent memo parts");
    }
    out.payload.append(p.chunk);
  }
  out.chain_digest = *parts.front().chain;
  return out;
}

Json EntryExport::to_json() const {
  Json memo_texts = Json::array();
  for (const auto& m : memos) memo_texts.push_back(m.text);
  return Json{{"seq", seq},
              {"kind", kind},
              {"payload_digest", crypto::to_hex(payload_digest)},
              {"prev_digest", crypto::to_hex(prev_digest)},
              {"chain_digest", crypto::to_hex(chain_digest)},
              {"memos", memo_texts}};
}

EntryExport EntryExport::from_json(const Json& j) {
  try {
    EntryExport e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.kind = j.at("kind").get<std::string>();
    e.payload_digest = crypto::digest_from_hex(j.at("payload_digest").get<std::string>());
    e.prev_digest = crypto::digest_from_hex(j.at("prev_digest").get<std::string>());
    e.chain_digest = crypto::digest_from_hex(j.at("chain_digest").get<std::string>());
    for (const auto& t : j.at("memos")) {
      auto p = parse_memo(t.get<std::string>());
      e.memos.push_back(Memo{p.seq, p.index, p.count, t.get<std::string>()});
    }
    return e;
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::kFormatError, ex.what());
  }
}

std::string AnchorExport::to_jsonl() const {
  Json header{{"format", "roma-memo-export"},
              {"version", kFormatVersion},
              {"hash", hash},
              {"seq_from", seq_from},
              {"seq_to", seq_to},
              {"head", head ? Json(crypto::to_hex(*head)) : Json(nullptr)},
              {"entries", entries.size()}};
  std::string out = canonical(header) + "\n";
  for (const auto& e : entries) out += canonical(e.to_json()) + "\n";
  return out;
}

AnchorExport AnchorExport::from_jsonl(std::string_view text) {
  AnchorExport out;
  std::istringstream in{std::string(text)};
  std::string line;
  bool have_header = false;
  std::size_t declared = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::kFormatError, "memo export line is not JSON");
    if (!have_header) {
      if (j.value("format", "") != "roma-memo-export" || j.value("version", 0u) != kFormatVersion) {
        throw Error(ErrorCode::kFormatError, "not a memo export");
      }
      out.hash = j.at("hash").get<std::string>();
      out.seq_from = j.at("seq_from").get<std::uint64_t>();
      out.seq_to = j.at("seq_to").get<std::uint64_t>();
      if (!j.at("head").is_null()) out.head = crypto::digest_from_hex(j.at("head").get<std::string>());
      declared = j.at("entries").get<std::size_t>();
      have_header = true;
      continue;
    }
    out.entries.push_back(EntryExport::from_json(j));
  }
  if (!have_header) throw Error(ErrorCode::kFormatError, "empty memo export");
  if (declared != out.entries.size()) throw Error(ErrorCode::kFormatError, "memo export truncated");
  return out;
}

AnchorExport export_memos(const std::filesystem::path& path, std::uint64_t from,
                          std::optional<std::uint64_t> to) {
  std::vector<LedgerEntry> all;
  try {
    all = read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kUnverifiedRange, e.what());
  }
  AnchorExport out;
  if (from < 1) from = 1;
  const std::uint64_t last = std::min<std::uint64_t>(to.value_or(all.size()), all.size());
  out.seq_from = from;
  out.seq_to = last;
  if (from > last) {
    out.seq_to = from - 1;
    return out;
  }
  VerifyResult v = verify_file(path, from, last);
  if (!v.ok) {
    throw Error(ErrorCode::kUnverifiedRange,
                "ledger fails verification at seq " + std::to_string(*v.first_bad_seq) + ": " +
                    v.reason);
  }
  out.head = all[last - 1].chain_digest;
  for (std::uint64_t s = from; s <= last; ++s) {
    const auto& e = all[s - 1];
    EntryExport x;
    x.seq = e.seq;
    x.kind = e.kind;
    x.payload_digest = e.payload_digest;
    x.prev_digest = e.prev_digest;
    x.chain_digest = e.chain_digest;
    x.memos = split_memos(e);
    out.entries.push_back(std::move(x));
  }
  return out;
}

}  // namespace roma::ledger
