#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "roma/error.hpp"
#include "roma/ledger.hpp"
#include "support.hpp"

using namespace roma;
using namespace roma::ledger;
using test::TempDir;

namespace {

std::uint64_t le(const std::string& b, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[pos + static_cast<std::size_t>(i)]);
  return v;
}

struct RawRecord {
  std::uint64_t seq;
  std::string payload;
  std::string payload_digest, prev_digest, chain_digest;
  std::size_t offset;  // start of the length prefix
};

// Independent parser of the on-disk layout.
std::vector<RawRecord> parse_raw(const std::string& bytes) {
  REQUIRE(bytes.substr(0, 12) == "ROMA-LEDGER\n");
  REQUIRE(le(bytes, 12, 4) == 1);
  std::vector<RawRecord> out;
  std::size_t pos = 16;
  while (pos < bytes.size()) {
    RawRecord r;
    r.offset = pos;
    std::size_t len = le(bytes, pos, 4);
    std::size_t p = pos + 4;
    r.seq = le(bytes, p, 8);
    p += 16;
    std::size_t kind_len = le(bytes, p, 2);
    p += 2 + kind_len;
    std::size_t payload_len = le(bytes, p, 4);
    p += 4;
    r.payload = bytes.substr(p, payload_len);
    p += payload_len;
    r.payload_digest = bytes.substr(p, 32);
    r.prev_digest = bytes.substr(p + 32, 32);
    r.chain_digest = bytes.substr(p + 64, 32);
    REQUIRE(p + 96 == pos + 4 + len);
    out.push_back(r);
    pos += 4 + len;
  }
  return out;
}

std::string bytes_of(const crypto::Digest& d) { return std::string(d.begin(), d.end()); }

std::string seq_be(std::uint64_t seq) {
  std::string s(8, '\0');
  for (int i = 7; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = static_cast<char>(seq & 0xff);
    seq >>= 8;
  }
  return s;
}

void flip_byte(const std::filesystem::path& p, std::size_t offset, unsigned char mask) {
  std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(static_cast<std::streamoff>(offset));
  char c;
  f.get(c);
  c = static_cast<char>(c ^ mask);
  f.seekp(static_cast<std::streamoff>(offset));
  f.put(c);
}

bool valid_utf8(const std::string& s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t n = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xe ? 3 : (c >> 3) == 0x1e ? 4 : 0;
    if (n == 0 || i + n > s.size()) return false;
    for (std::size_t k = 1; k < n; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
    }
    i += n;
  }
  return true;
}

void fill(const std::filesystem::path& p, int n) {
  Ledger l(p);
  for (int i = 0; i < n; ++i) l.append("test.event", 1000 + i, Json{{"i", i}, {"note", "entry"}});
}

}  // namespace

TEST_CASE("canonical json") {
  CHECK(canonical(Json{{"b", 1}, {"a", Json{{"d", true}, {"c", nullptr}}}}) == R"({"a":{"c":null,"d":true},"b":1})");
  CHECK(canonical(Json::parse(R"({ "x" : [ 1 , 2 ] })")) == R"({"x":[1,2]})");
  CHECK_THROWS_AS(canonical(Json(std::nan(""))), Error);
}

TEST_CASE("chain digests match a libsodium oracle") {
  TempDir dir;
  auto path = dir / "ledger.bin";
  fill(path, 20);
  auto raw = parse_raw(test::read_file(path));
  REQUIRE(raw.size() == 20);
  std::string prev(32, '\0');
  for (std::size_t i = 0; i < raw.size(); ++i) {
    CHECK(raw[i].seq == i + 1);
    CHECK(raw[i].payload_digest == bytes_of(test::oracle_sha256(raw[i].payload)));
    CHECK(raw[i].prev_digest == prev);
    auto chain = test::oracle_sha256(prev + raw[i].payload_digest + seq_be(raw[i].seq));
    CHECK(raw[i].chain_digest == bytes_of(chain));
    prev = raw[i].chain_digest;
  }
  auto v = verify_file(path);
  CHECK(v.ok);
  CHECK(v.entries == 20);
  CHECK(bytes_of(v.head) == prev);
  CHECK(Ledger(path).size() == 20);
}

TEST_CASE("payload carries kind, time and data") {
  TempDir dir;
  Ledger l(dir / "l.bin");
  auto e = l.append("team.created", 42, Json{{"team", "t1"}});
  CHECK(e.seq == 1);
  CHECK(e.payload == R"({"at":42,"data":{"team":"t1"},"kind":"team.created","v":1})");
  CHECK(e.data() == Json{{"team", "t1"}});
  CHECK(l.entries(1, 1).size() == 1);
}

TEST_CASE("tampering is detected at the exact entry") {
  TempDir dir;
  auto path = dir / "ledger.bin";
  fill(path, 10);
  auto raw = parse_raw(test::read_file(path));

  SUBCASE("payload byte of entry 5") {
    flip_byte(path, raw[4].offset + 4 + 8 + 8 + 2 + 10 + 4 + 3, 0x01);
    auto v = verify_file(path);
    CHECK_FALSE(v.ok);
    CHECK(v.first_bad_seq == 5u);
    CHECK(v.entries == 4);
    CHECK_THROWS_AS(Ledger{path}, Error);
  }
  SUBCASE("chain digest of entry 7") {
    flip_byte(path, raw[7].offset - 1, 0x80);
    CHECK(verify_file(path).first_bad_seq == 7u);
  }
  SUBCASE("header") {
    flip_byte(path, 0, 0x01);
    auto v = verify_file(path);
    CHECK_FALSE(v.ok);
  }
}

TEST_CASE("a torn tail is truncated on open and a cut record is reported") {
  TempDir dir;
  auto path = dir / "ledger.bin";
  fill(path, 5);
  auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 10);
  auto v = verify_file(path);
  CHECK_FALSE(v.ok);
  CHECK(v.first_bad_seq == 5u);
  {
    Ledger l(path);
    CHECK(l.repaired_on_open());
    CHECK(l.size() == 4);
    auto e = l.append("test.event", 9, Json::object());
    CHECK(e.seq == 5);
  }
  CHECK(verify_file(path).ok);
}

TEST_CASE("memo split and reassembly") {
  TempDir dir;
  Ledger l(dir / "l.bin");
  std::string big(1500, 'x');
  auto e = l.append("artifact.generated", 7, Json{{"blob", big}});
  auto memos = split_memos(e);
  CHECK(memos.size() == 3);
  for (const auto& m : memos) {
    CHECK(m.text.size() <= kMemoBudget);
    CHECK(m.text.rfind("RM1|1|", 0) == 0);
  }
  CHECK(memos[0].text.find(crypto::to_hex(e.chain_digest)) != std::string::npos);
  auto shuffled = memos;
  std::swap(shuffled[0], shuffled[2]);
  auto r = reassemble(shuffled);
  CHECK(r.payload == e.payload);
  CHECK(r.seq == 1);
  CHECK(r.chain_digest == e.chain_digest);

  auto small = split_memos(l.append("x", 8, Json{{"a", 1}}));
  CHECK(small.size() == 1);

  auto missing = memos;
  missing.pop_back();
  CHECK_THROWS_AS(reassemble(missing), Error);
  auto dup = memos;
  dup[1] = dup[0];
  CHECK_THROWS_AS(reassemble(dup), Error);

  // Multi-byte characters are never cut.
  std::string accents;
  for (int i = 0; i < 700; ++i) accents += "\xc3\xa9";
  auto u = split_memos(l.append("x", 9, Json{{"s", accents}}));
  for (const auto& m : u) CHECK(valid_utf8(m.text));
}

TEST_CASE("memo export round trip and ranges") {
  TempDir dir;
  auto path = dir / "ledger.bin";
  {
    Ledger l(path);
    for (int i = 0; i < 6; ++i) l.append("e", i, Json{{"pad", std::string(static_cast<std::size_t>(200 * i), 'p')}});
  }
  auto ex = export_memos(path, 2, 5);
  CHECK(ex.seq_from == 2);
  CHECK(ex.seq_to == 5);
  REQUIRE(ex.entries.size() == 4);
  auto text = ex.to_jsonl();
  auto back = AnchorExport::from_jsonl(text);
  CHECK(back.to_jsonl() == text);
  auto entries = Ledger(path).entries();
  for (const auto& ee : back.entries) {
    auto r = reassemble(ee.memos);
    CHECK(r.payload == entries[ee.seq - 1].payload);
    CHECK(crypto::sha256(r.payload) == ee.payload_digest);
    CHECK(ledger::chain_digest(ee.prev_digest, ee.payload_digest, ee.seq) == ee.chain_digest);
  }
  REQUIRE(back.head.has_value());
  CHECK(*back.head == entries[4].chain_digest);

  CHECK(export_memos(path, 5, 2).entries.empty());
  CHECK(export_memos(path, 50).entries.empty());

  flip_byte(path, std::filesystem::file_size(path) - 1, 0x01);
  try {
    export_memos(path, 1, 6);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnverifiedRange);
  }
}
