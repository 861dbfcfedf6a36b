#include <doctest.h>

#include "roma/bundled.hpp"
#include "roma/error.hpp"
#include "roma/standards.hpp"
#include "support.hpp"

using namespace roma;
using namespace roma::standards;
using role_model::ArchetypeKind;
using role_model::Role;
using test::imi_sample;
using test::kDay;
using test::kMonday;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

MatrixMember matrix_member(std::string id, TraitVector traits) {
  auto profile = psychometrics::PersonalityProfile::manual(traits);
  auto z = psychometrics::zscore_profile(profile, psychometrics::TraitNorms::reference());
  MatrixMember m;
  m.member = std::move(id);
  m.profile = profile;
  m.archetype = role_model::classify_archetype(z);
  m.recommendation = role_model::score_roles(z, bundled::effect_model());
  return m;
}

// Explorer, Orchestrator, Craftsperson and Architect in that order.
std::vector<MatrixMember> four_members() {
  return {matrix_member("ana", {4.5, 3.0, 3.0, 3.2, 2.9}), matrix_member("ben", {3.0, 3.0, 3.8, 4.0, 2.9}),
          matrix_member("cai", {3.5, 3.0, 2.0, 3.2, 4.0}), matrix_member("dee", {3.5, 3.9, 2.9, 3.2, 2.9})};
}

std::vector<MemberMotivation> cohort(std::size_t n) {
  std::vector<MemberMotivation> out;
  for (std::size_t i = 0; i < n; ++i) {
    MemberMotivation m;
    m.member = "m" + std::to_string(i + 1);
    monitor::Baseline b;
    b.member_id = m.member;
    b.imi = 0.7;
    m.baseline = b;
    for (int w = 0; w < 2; ++w) {
      m.samples.push_back(imi_sample(0.5 + 0.1 * static_cast<double>(i) + 0.05 * w, kMonday + w * 7 * kDay + 3600, m.member));
    }
    out.push_back(std::move(m));
  }
  return out;
}

ReportPeriod two_weeks() { return {kMonday, kMonday + 14 * kDay, "2026-W02..W03"}; }

}  // namespace

TEST_CASE("process map") {
  CHECK(anchor_for(ArtifactKind::kTeamCompositionMatrix).code == "PM.1.6");
  CHECK(anchor_for(ArtifactKind::kTeamCompositionMatrix).activity == "Team Assembly");
  CHECK(anchor_for(ArtifactKind::kPairingBacklogItem).code == "E3");
  CHECK(anchor_for(ArtifactKind::kSprintMotivationTrend).code == "PM.3.3");
  CHECK(anchor_for(ArtifactKind::kPersonalityOptimizationSummary).code == "PM.4.1");
  CHECK(anchor("E3.1").activity == "Role Review");
  CHECK(code_of([] { anchor("PM.9.9"); }) == ErrorCode::kUnknownAnchor);
  CHECK(code_of([] { IsoArtifact::make(ArtifactKind::kPairingBacklogItem, "PM.1.6", Json::object(), 0); }) ==
        ErrorCode::kUnknownAnchor);
  for (auto k : {ArtifactKind::kTeamCompositionMatrix, ArtifactKind::kPairingBacklogItem,
                 ArtifactKind::kMotivationBaselineReport, ArtifactKind::kSprintMotivationTrend,
                 ArtifactKind::kRetrospectiveGuide, ArtifactKind::kPersonalityOptimizationSummary,
                 ArtifactKind::kAssessmentPolicyRecord}) {
    CHECK(parse_artifact_kind(artifact_kind_name(k)) == k);
  }
}

TEST_CASE("templates") {
  CHECK(fill_template("a {{x}} b {{y}}", {{"x", "1"}, {"y", "2"}}) == "a 1 b 2");
  CHECK(code_of([] { fill_template("{{missing}}", {}); }) == ErrorCode::kFormatError);
  CHECK(fixed(0.12345) == "0.1235");
  CHECK(fixed(2.0, 2) == "2.00");
}

TEST_CASE("team composition matrix") {
  auto members = four_members();
  REQUIRE(*members[0].archetype == ArchetypeKind::kExplorer);
  REQUIRE(*members[1].archetype == ArchetypeKind::kOrchestrator);
  REQUIRE(*members[2].archetype == ArchetypeKind::kCraftsperson);
  REQUIRE(*members[3].archetype == ArchetypeKind::kArchitect);
  members[0].current_role = Role::kNavigator;
  auto a = team_composition_matrix("t1", members, kMonday);
  CHECK(a.anchor.code == "PM.1.6");
  const auto& rows = a.body["rows"];
  REQUIRE(rows.size() == 4);
  CHECK(rows[0]["archetype"] == "Explorer");
  CHECK(rows[2]["recommended_role"] == "Solo");
  CHECK(rows[0]["current_role"] == "Navigator");
  CHECK(a.file_stem() == "PM.1.6_TeamCompositionMatrix_2026-01-05");
  CHECK(test::matches_golden("team_composition_matrix.json", a.machine()));
  CHECK(test::matches_golden("team_composition_matrix.md", a.markdown()));

  members[1].profile.reset();
  try {
    team_composition_matrix("t1", members, kMonday);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIncompleteAssessments);
    CHECK(std::string(e.what()).find("ben") != std::string::npos);
  }
  CHECK(code_of([] { team_composition_matrix("t1", {}, kMonday); }) == ErrorCode::kIncompleteAssessments);
}

TEST_CASE("pairing backlog item embeds the role review") {
  pairing::TeamMember ex{"ana", ArchetypeKind::kExplorer, {}, 0.0};
  pairing::TeamMember ar{"dee", ArchetypeKind::kArchitect, {}, 0.0};
  std::vector<pairing::PairScore> pairs{pairing::pair_score(ex, ar)};
  const auto& model = bundled::effect_model();
  std::vector<PlanMember> plan{
      {"ana", Role::kPilot, role_model::rotation_schedule(model.rotation(ArchetypeKind::kExplorer), 10)},
      {"dee", Role::kNavigator, role_model::rotation_schedule(model.rotation(ArchetypeKind::kArchitect), 10)}};
  auto items = pairing_backlog_items(pairs, plan, "S1", kMonday);
  REQUIRE(items.size() == 1);
  const auto& b = items[0].body;
  CHECK(items[0].anchor.code == "E3");
  CHECK(b["score"] == 2);
  CHECK(b["role_review"]["anchor"] == "E3.1");
  CHECK(b["role_review"]["members"][0]["scheduled"]["Pilot"] == 7);
  CHECK(test::matches_golden("pairing_backlog_item.json", items[0].machine()));
  CHECK(test::matches_golden("pairing_backlog_item.md", items[0].markdown()));
}

TEST_CASE("motivation report") {
  auto members = cohort(3);
  members[0].triggers = monitor::evaluate_triggers("m1", &*members[0].baseline, members[0].samples,
                                                   [] {
                                                     monitor::MonitorConfig c;
                                                     c.fixed_delta = 0.05;
                                                     return c;
                                                   }());
  REQUIRE(members[0].triggers.size() == 1);
  auto rep = motivation_report("t1", members, two_weeks(), false, {}, kMonday + 14 * kDay);
  CHECK(rep.anchor.code == "PM.3.3");
  CHECK(rep.body["view"] == "member");
  const auto& m1 = rep.body["members"][0];
  CHECK(m1["weeks"][0]["mean"] == doctest::Approx(0.5));
  CHECK(m1["weeks"][0]["delta"] == doctest::Approx(-0.2));
  CHECK(m1["triggers"].size() == 1);
  CHECK(test::matches_golden("trigger_report.json", rep.machine()));
  CHECK(test::matches_golden("trigger_report.md", rep.markdown()));

  auto anon = motivation_report("t1", members, two_weeks(), true, {}, kMonday);
  CHECK(anon.body["view"] == "team");
  CHECK_FALSE(anon.body.contains("members"));
  CHECK(anon.machine().find("m1") == std::string::npos);
  // Week 1 means 0.5, 0.6, 0.7.
  CHECK(anon.body["weeks"][0]["mean"] == doctest::Approx(0.6));
  CHECK(anon.body["trigger_count"] == 1);

  auto two = cohort(2);
  CHECK(code_of([&] { motivation_report("t1", two, two_weeks(), true, {}, kMonday); }) ==
        ErrorCode::kAnonymityThreshold);
  ReportPeriod empty{kMonday + 100 * kDay, kMonday + 107 * kDay, "later"};
  CHECK(code_of([&] { motivation_report("t1", members, empty, false, {}, kMonday); }) == ErrorCode::kNoData);
}

TEST_CASE("closure summary") {
  ProjectHistory h;
  h.team_id = "t1";
  h.pairs = {{"a", "b", {"S1"}, {0.8, 0.9}, 0.7}, {"c", "d", {"S1"}, {0.5, 0.6}, 0.7}, {"e", "f", {"S2"}, {}, 0.6}};
  h.role_counts["a"] = {3, 1, 0};
  h.role_counts["b"] = {1, 3, 0};
  h.triggers_by_kind["ImiBelowBaseline2Weeks"] = 1;
  CHECK(code_of([&] { closure_summary(h, kMonday); }) == ErrorCode::kProjectOpen);
  h.closed = true;
  auto s = closure_summary(h, kMonday);
  CHECK(s.anchor.code == "PM.4.1");
  CHECK(s.body["top_pair"]["pair"] == Json::array({"a", "b"}));
  CHECK(s.body["top_pair"]["delta"] == doctest::Approx(0.15));
  CHECK(s.body["successful_pairings"].size() == 1);
  CHECK(s.body["failed_experiments"].size() == 1);
  CHECK(s.body["unmeasured_pairs"].size() == 1);
  CHECK(s.body["rotation_totals"]["Pilot"] == 4);
}

TEST_CASE("policy, baseline and retrospective artifacts") {
  PolicyInputs in;
  in.team_id = "t1";
  in.policy_version = "1";
  in.instruments = {"bfi10", "imi_ie"};
  in.hash = "sha-256";
  auto p = assessment_policy_record(in, kMonday);
  CHECK(p.anchor.code == "PM.1.13");
  CHECK(p.markdown().find("bfi10") != std::string::npos);

  auto members = cohort(3);
  members.push_back(MemberMotivation{"m4", std::nullopt, {}, {}});
  auto b = baseline_report("t1", members, {}, kMonday);
  CHECK(b.anchor.code == "PM.2.2");
  CHECK(b.body["baselines"].size() == 3);
  CHECK(b.body["pending"].size() == 1);

  RetrospectiveInputs r;
  r.team_id = "t1";
  r.sprint_id = "S1";
  r.triggers.push_back(monitor::external_signal("t1", monitor::TriggerKind::kVelocityDecline, "slow", kMonday));
  auto g = retrospective_guide(r, kMonday);
  CHECK(g.anchor.code == "E7");
  CHECK(g.body["signals_by_kind"]["VelocityDecline"] == 1);
}
