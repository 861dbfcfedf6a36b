#include <doctest.h>

#include <algorithm>
#include <random>

#include "roma/bundled.hpp"
#include "roma/error.hpp"
#include "roma/monitor.hpp"
#include "support.hpp"

using namespace roma;
using namespace roma::monitor;
using psychometrics::MotivationSample;
using test::imi_sample;
using test::kDay;
using test::kMonday;

namespace {

std::vector<MotivationSample> founding(std::initializer_list<double> values) {
  std::vector<MotivationSample> out;
  Timestamp t = kMonday;
  for (double v : values) {
    out.push_back(imi_sample(v, t));
    t += 3600;
  }
  return out;
}

Baseline fixed_baseline(double value) {
  Baseline b;
  b.member_id = "m1";
  b.imi = value;
  return b;
}

MonitorConfig with_delta(double d) {
  MonitorConfig c;
  c.fixed_delta = d;
  return c;
}

// One sample per week starting at the week after kMonday.
std::vector<MotivationSample> weeks(std::initializer_list<double> values, int first_week = 1) {
  std::vector<MotivationSample> out;
  int w = first_week;
  for (double v : values) out.push_back(imi_sample(v, kMonday + w++ * 7 * kDay + 10 * 3600));
  return out;
}

MotivationSample mwms_sample(double normalized, Timestamp at) {
  auto s = imi_sample(normalized, at);
  s.instrument = psychometrics::InstrumentKind::kMwms;
  return s;
}

}  // namespace

TEST_CASE("baseline from founding samples") {
  CHECK(establish_baseline("m1", founding({0.8, 0.8, 0.8, 0.8, 0.8, 0.8})).imi == doctest::Approx(0.8));
  auto b = establish_baseline("m1", founding({0.6, 0.7, 0.8, 0.9, 1.0, 0.5}));
  CHECK(b.imi == doctest::Approx(0.75));
  // Sample SD by hand: deviations +-0.05, +-0.15, +-0.25 -> sum of squares 0.175 over 5.
  CHECK(b.imi_sd == doctest::Approx(std::sqrt(0.175 / 5.0)));
  CHECK(b.established_from == 6);
  CHECK_FALSE(b.mwms.has_value());
  CHECK(imi_delta(b, MonitorConfig{}) == doctest::Approx(0.5 * std::sqrt(0.175 / 5.0)));

  // Only the first six by time count.
  auto seven = founding({0.6, 0.7, 0.8, 0.9, 1.0, 0.5, 0.0});
  std::reverse(seven.begin(), seven.end());
  CHECK(establish_baseline("m1", seven).imi == doctest::Approx(0.75));

  try {
    establish_baseline("m1", founding({0.5, 0.5, 0.5, 0.5, 0.5}));
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficientSamples);
  }
}

TEST_CASE("baseline includes MWMS once three MWMS samples exist") {
  auto s = founding({0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  s.push_back(mwms_sample(0.4, kMonday));
  s.push_back(mwms_sample(0.6, kMonday + kDay));
  CHECK_FALSE(establish_baseline("m1", s).mwms.has_value());
  s.push_back(mwms_sample(0.8, kMonday + 2 * kDay));
  auto b = establish_baseline("m1", s);
  REQUIRE(b.mwms.has_value());
  CHECK(*b.mwms == doctest::Approx(0.6));
}

TEST_CASE("iso weeks and months") {
  CHECK(iso_week(kMonday).label() == "2026-W02");
  CHECK(iso_week(kMonday - 1).label() == "2026-W01");
  // 2025-12-29 belongs to ISO 2026-W01.
  CHECK(iso_week(kMonday - 7 * kDay).label() == "2026-W01");
  CHECK(iso_week(kMonday - 8 * kDay).label() == "2025-W52");
  // 2021-01-03 (Sunday) is still in 2020-W53.
  CHECK(iso_week(1609632000).label() == "2020-W53");
  CHECK(calendar_month(kMonday).label() == "2026-01");
  // Offsets move the local day.
  CHECK(iso_week(kMonday - 3600, 120).label() == "2026-W02");
  CHECK(iso_week(kMonday + 3600, -120).label() == "2026-W01");
}

TEST_CASE("weekly aggregate") {
  auto week = iso_week(kMonday);
  std::vector<MotivationSample> one{imi_sample(0.5, kMonday + 3600)};
  CHECK(weekly_aggregate(one, week) == doctest::Approx(0.5));
  CHECK_FALSE(weekly_aggregate(std::vector<MotivationSample>{}, week).has_value());
  std::vector<MotivationSample> three{imi_sample(0.4, kMonday), imi_sample(0.5, kMonday + kDay),
                                      imi_sample(0.6, kMonday + 6 * kDay)};
  CHECK(*weekly_aggregate(three, week) == doctest::Approx(0.5));
  // Next Monday is a different week.
  three.push_back(imi_sample(0.0, kMonday + 7 * kDay));
  CHECK(*weekly_aggregate(three, week) == doctest::Approx(0.5));
}

TEST_CASE("aggregation ignores arrival order") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<MotivationSample> s;
  for (int i = 0; i < 40; ++i) s.push_back(imi_sample(u(rng), kMonday + i * 9 * 3600));
  auto a = weekly_series(s);
  std::shuffle(s.begin(), s.end(), rng);
  auto b = weekly_series(s);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].period == b[i].period);
    CHECK(a[i].value == b[i].value);
  }
}

TEST_CASE("trigger examples") {
  auto b = fixed_baseline(0.8);
  auto cfg = with_delta(0.05);
  CHECK(evaluate_triggers("m1", &b, weeks({0.9, 0.9}), cfg).empty());
  auto fired = evaluate_triggers("m1", &b, weeks({0.7, 0.72}), cfg);
  REQUIRE(fired.size() == 1);
  CHECK(fired[0].kind == TriggerKind::kImiBelowBaseline2Weeks);
  CHECK(fired[0].threshold == doctest::Approx(0.75));
  REQUIRE(fired[0].evidence.size() == 2);
  CHECK(fired[0].evidence[0].value == doctest::Approx(0.7));
  CHECK(fired[0].evidence[1].value == doctest::Approx(0.72));
  CHECK(evaluate_triggers("m1", &b, weeks({0.7, 0.9}), cfg).empty());
  CHECK(evaluate_triggers("m1", &b, weeks({0.7, 0.9, 0.7}), cfg).empty());
  // Within delta is not below.
  CHECK(evaluate_triggers("m1", &b, weeks({0.76, 0.76}), cfg).empty());
  // Literal rule with delta 0.
  CHECK(evaluate_triggers("m1", &b, weeks({0.79, 0.79}), with_delta(0.0)).size() == 1);
  // Empty weeks are skipped: the two most recent non-empty aggregates count.
  auto gap = weeks({0.7});
  auto later = weeks({0.7}, 4);
  gap.insert(gap.end(), later.begin(), later.end());
  CHECK(evaluate_triggers("m1", &b, gap, cfg).size() == 1);
  CHECK_THROWS_AS(evaluate_triggers("m1", nullptr, gap, cfg), Error);
}

TEST_CASE("trigger idempotency and re-arming") {
  auto b = fixed_baseline(0.8);
  auto cfg = with_delta(0.05);
  auto h = weeks({0.9, 0.7, 0.7});
  auto first = evaluate_triggers("m1", &b, h, cfg);
  REQUIRE(first.size() == 1);
  CHECK(evaluate_triggers("m1", &b, h, cfg)[0].id() == first[0].id());
  // The run continues: same event.
  auto longer = weeks({0.9, 0.7, 0.7, 0.6});
  CHECK(evaluate_triggers("m1", &b, longer, cfg)[0].id() == first[0].id());
  // A normal week, then a new dip: a new event.
  auto rearmed = weeks({0.9, 0.7, 0.7, 0.9, 0.6, 0.6});
  auto again = evaluate_triggers("m1", &b, rearmed, cfg);
  REQUIRE(again.size() == 1);
  CHECK(again[0].id() != first[0].id());
  CHECK(first[0].id() == "ImiBelowBaseline2Weeks:m1:" + iso_week(kMonday + 3 * 7 * kDay).label());
}

TEST_CASE("strictly increasing series never fires") {
  std::vector<MotivationSample> h;
  for (int w = 0; w < 20; ++w) h.push_back(imi_sample(0.05 * w, kMonday + w * 7 * kDay));
  // Increasing and above baseline at every step after the second week.
  auto rising = fixed_baseline(0.1);
  CHECK(evaluate_triggers("m1", &rising, h, with_delta(0.0)).empty());
}

TEST_CASE("monthly MWMS trigger") {
  auto b = fixed_baseline(0.8);
  b.mwms = 0.7;
  auto cfg = with_delta(0.05);
  std::vector<MotivationSample> h{mwms_sample(0.5, kMonday), mwms_sample(0.55, kMonday + 35 * kDay)};
  auto ev = evaluate_triggers("m1", &b, h, cfg);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].kind == TriggerKind::kMwmsBelowBaseline2Months);
  CHECK(ev[0].evidence[0].period == "2026-01");
  CHECK(ev[0].evidence[1].period == "2026-02");
}

TEST_CASE("external signals and reassessment") {
  auto ev = external_signal("t1", TriggerKind::kVelocityDecline, "velocity -30%", kMonday);
  CHECK(ev.note == "velocity -30%");
  CHECK_THROWS_AS(external_signal("t1", TriggerKind::kImiBelowBaseline2Weeks, "", kMonday), Error);
  CHECK_FALSE(reassessment_due(kMonday, kMonday + 90 * kDay));
  CHECK(reassessment_due(kMonday, kMonday + 91 * kDay));
  for (auto k : {TriggerKind::kImiBelowBaseline2Weeks, TriggerKind::kMwmsBelowBaseline2Months,
                 TriggerKind::kVelocityDecline, TriggerKind::kPhaseTransition}) {
    CHECK(parse_trigger_kind(trigger_kind_name(k)) == k);
  }
}

TEST_CASE("interventions") {
  ZVector craft{0, 0, -1, 0, 1};
  REQUIRE(role_model::classify_archetype(craft) == role_model::ArchetypeKind::kCraftsperson);
  InterventionContext ctx;
  ctx.member_id = "m1";
  ctx.current_role = role_model::Role::kPilot;
  ctx.recommendation = role_model::score_roles(craft, bundled::effect_model());
  auto trig = external_signal("m1", TriggerKind::kPhaseTransition, "", kMonday);

  auto solo = propose_interventions(trig, ctx);
  REQUIRE(solo.size() == 2);
  CHECK(solo[0].kind == InterventionKind::kRoleAdjustment);
  CHECK(solo[0].to_role == role_model::Role::kSolo);
  CHECK(solo[1].kind == InterventionKind::kSkillDevelopment);

  pairing::PairScore p;
  p.member_a = "m2";
  p.member_b = "m1";
  p.flags = static_cast<unsigned>(pairing::PairFlag::kCaution);
  ctx.current_pair = p;
  auto paired = propose_interventions(trig, ctx);
  REQUIRE(paired.size() == 3);
  CHECK(paired[1].kind == InterventionKind::kPairReconfiguration);
  CHECK(paired[1].current_partner == "m2");
  CHECK(paired[2].kind == InterventionKind::kSkillDevelopment);

  CHECK(propose_interventions(std::nullopt, ctx).empty());
}
