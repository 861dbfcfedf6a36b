#include <doctest.h>

#include <json.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "roma/roma.h"
#include "support.hpp"

using Json = nlohmann::json;
using roma::test::TempDir;

namespace {

struct Out {
  char* p = nullptr;
  ~Out() { roma_string_free(p); }
  Json json() const { return Json::parse(p); }
};

std::string fixture(const std::string& name) { return roma::test::read_file(std::filesystem::path(ROMA_FIXTURE_DIR) / name); }

Json responses(int high_item, int low_item) {
  Json r = Json::object();
  for (int i = 1; i <= 10; ++i) r[std::to_string(i)] = 3;
  r[std::to_string(high_item)] = 5;
  r[std::to_string(low_item)] = 1;
  return r;
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::strcmp(roma_status_name(ROMA_OK), "Ok") == 0);
  CHECK(std::strcmp(roma_status_name(ROMA_ERR_NO_CONSENT), "NoConsent") == 0);
  CHECK(std::strcmp(roma_status_name(ROMA_ERR_CHECKSUM_MISMATCH), "ChecksumMismatch") == 0);
  CHECK(std::strlen(roma_version()) > 0);
  CHECK(roma_is_mutating("submit_pulse") == 1);
  CHECK(roma_is_mutating("get_team") == 0);
  CHECK(roma_is_mutating(nullptr) == 0);
  roma_string_free(nullptr);
}

TEST_CASE("platform lifecycle through the C API") {
  TempDir dir;
  roma_platform* p = nullptr;
  REQUIRE(roma_platform_open(dir.path().c_str(), nullptr, &p) == ROMA_OK);
  REQUIRE(p != nullptr);

  Out team;
  REQUIRE(roma_platform_call(p, "create_team", R"({"team":"t1"})", &team.p) == ROMA_OK);
  std::string lead = team.json()["lead_token"];
  CHECK(roma_platform_authorize(p, ROMA_SCOPE_LEAD, "t1", nullptr, lead.c_str()) == 1);
  CHECK(roma_platform_authorize(p, ROMA_SCOPE_LEAD, "t1", nullptr, "nope") == 0);

  for (const char* m : {"ana", "ben"}) {
    Out r, c, a;
    Json reg{{"team", "t1"}, {"member", m}};
    REQUIRE(roma_platform_call(p, "register_member", reg.dump().c_str(), &r.p) == ROMA_OK);
    Json consent{{"team", "t1"}, {"member", m}, {"scopes", {"personality", "motivation"}}};
    REQUIRE(roma_platform_call(p, "grant_consent", consent.dump().c_str(), &c.p) == ROMA_OK);
    Json bfi{{"team", "t1"},
             {"member", m},
             {"instrument", "bfi10"},
             {"responses", std::string(m) == "ana" ? responses(10, 5) : responses(6, 1)}};
    REQUIRE(roma_platform_call(p, "submit_assessment", bfi.dump().c_str(), &a.p) == ROMA_OK);
  }

  Out rec;
  REQUIRE(roma_platform_call(p, "recommend", R"({"team":"t1"})", &rec.p) == ROMA_OK);
  auto bundle = rec.json()["bundle"];
  CHECK(bundle["assignment"]["pairs"].size() == 1);

  Out snap, replay;
  REQUIRE(roma_platform_snapshot(p, 0, &snap.p) == ROMA_OK);
  REQUIRE(roma_platform_snapshot(p, 1, &replay.p) == ROMA_OK);
  CHECK(std::string(snap.p) == std::string(replay.p));

  Out cfg;
  REQUIRE(roma_platform_config(p, &cfg.p) == ROMA_OK);
  CHECK(cfg.json().contains("thresholds"));
  CHECK(std::string(cfg.p).find("token_secret\":\"") == std::string::npos);

  Out err;
  CHECK(roma_platform_call(p, "get_team", R"({"team":"zzz"})", &err.p) == ROMA_ERR_NOT_FOUND);
  CHECK(err.json()["error"]["code"] == "NotFound");
  CHECK(std::strlen(roma_last_error()) > 0);

  Out bad;
  CHECK(roma_platform_call(p, "get_team", "{not json", &bad.p) == ROMA_ERR_INVALID_ARGUMENT);
  Out unknown;
  CHECK(roma_platform_call(p, "frobnicate", "{}", &unknown.p) != ROMA_OK);
  CHECK(roma_platform_call(nullptr, "get_team", "{}", nullptr) == ROMA_ERR_INVALID_ARGUMENT);

  roma_platform_close(p);

  // Reopening replays into the same state.
  REQUIRE(roma_platform_open(dir.path().c_str(), nullptr, &p) == ROMA_OK);
  Out again;
  REQUIRE(roma_platform_snapshot(p, 0, &again.p) == ROMA_OK);
  CHECK(std::string(again.p) == std::string(snap.p));
  roma_platform_close(p);
}

TEST_CASE("open rejects bad arguments and configs") {
  roma_platform* p = reinterpret_cast<roma_platform*>(0x1);
  CHECK(roma_platform_open("", nullptr, &p) == ROMA_ERR_INVALID_ARGUMENT);
  CHECK(p == nullptr);
  CHECK(roma_platform_open("x", nullptr, nullptr) == ROMA_ERR_INVALID_ARGUMENT);
  TempDir dir;
  auto cfg = dir / "cfg.json";
  roma::test::write_file(cfg, R"({"surprise": 1})");
  CHECK(roma_platform_open((dir / "data").c_str(), cfg.c_str(), &p) == ROMA_ERR_CONFIG);
}

TEST_CASE("batch entry points") {
  Out c;
  REQUIRE(roma_cluster(fixture("cohort_shrunk.csv").c_str(), 2, 6, 0, &c.p) == ROMA_OK);
  auto cl = c.json();
  CHECK(cl["k"] == 3);
  CHECK(cl["clusters"][0]["archetype"] == "Explorer");

  Out fixed;
  REQUIRE(roma_cluster(fixture("cohort_shrunk.csv").c_str(), 2, 6, 2, &fixed.p) == ROMA_OK);
  CHECK(fixed.json()["k"] == 2);

  Out too_few;
  CHECK(roma_cluster("a,3,3,3,3,3\n", 2, 6, 0, &too_few.p) == ROMA_ERR_TOO_FEW_PROFILES);

  Out s;
  REQUIRE(roma_score(nullptr, fixture("assessments.json").c_str(), &s.p) == ROMA_OK);
  auto scored = s.json();
  CHECK(scored[0]["archetype"] == "Explorer");
  CHECK(scored[0]["traits"]["O"] == doctest::Approx(5.0));
  // Uniform 5s on a 1..7 scale with two reversed items: (5 * 5 + 3 + 3) / 7.
  CHECK(scored[1]["raw"] == doctest::Approx(31.0 / 7.0));

  Out bad;
  CHECK(roma_score(nullptr, R"({"instrument":"bfi10","responses":{"1":6}})", &bad.p) != ROMA_OK);
  CHECK(bad.json()["error"].contains("message"));

  Out r;
  REQUIRE(roma_recommend(nullptr, fixture("team.json").c_str(), &r.p) == ROMA_OK);
  CHECK(r.json()["assignment"]["total_score"] == 4);

  Out m;
  REQUIRE(roma_match(nullptr, fixture("team.json").c_str(), &m.p) == ROMA_OK);
  CHECK(m.json().dump().find("total_score") != std::string::npos);
}

TEST_CASE("ledger verification and memos") {
  TempDir dir;
  roma_platform* p = nullptr;
  REQUIRE(roma_platform_open(dir.path().c_str(), nullptr, &p) == ROMA_OK);
  for (int i = 0; i < 4; ++i) {
    Out o;
    Json req{{"team", "t" + std::to_string(i)}};
    REQUIRE(roma_platform_call(p, "create_team", req.dump().c_str(), &o.p) == ROMA_OK);
  }
  roma_platform_close(p);

  auto ledger = (dir / "ledger.bin").string();
  Out ok;
  CHECK(roma_verify_ledger(ledger.c_str(), &ok.p) == ROMA_OK);
  CHECK(ok.json()["entries"] == 4);

  Out memos;
  REQUIRE(roma_export_memos(ledger.c_str(), 2, 0, &memos.p) == ROMA_OK);
  std::string text = memos.p;
  CHECK(text.find("RM1|") != std::string::npos);

  {
    std::fstream f(ledger, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(-5, std::ios::end);
    f.put('\x7f');
  }
  Out bad;
  CHECK(roma_verify_ledger(ledger.c_str(), &bad.p) == ROMA_ERR_CHECKSUM_MISMATCH);
  CHECK(bad.json()["ok"] == false);
  CHECK(bad.json()["first_bad_seq"] == 4);
  Out none;
  CHECK(roma_export_memos(ledger.c_str(), 1, 0, &none.p) == ROMA_ERR_UNVERIFIED_RANGE);
}
