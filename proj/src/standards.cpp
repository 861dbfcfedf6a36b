#include "roma/standards.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "roma/bundled.hpp"
#include "roma/error.hpp"
#include "roma/record_file.hpp"

namespace roma::standards {
namespace {

using role_model::Role;

constexpr std::array<ArtifactKind, 7> kAllKinds = {
    ArtifactKind::kTeamCompositionMatrix,     ArtifactKind::kPairingBacklogItem,
    ArtifactKind::kMotivationBaselineReport,  ArtifactKind::kSprintMotivationTrend,
    ArtifactKind::kRetrospectiveGuide,        ArtifactKind::kPersonalityOptimizationSummary,
    ArtifactKind::kAssessmentPolicyRecord,
};

constexpr std::string_view kRoleReviewAnchor = "E3.1";

struct ProcessMap {
  std::vector<IsoAnchor> anchors;
  std::map<ArtifactKind, std::string> kind_anchor;
};

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

const ProcessMap& process_map() {
  static const ProcessMap map = [] {
    RecordFile f = parse_record_file(bundled::file("iso29110_map.txt"), "roma-iso29110-map");
    ProcessMap m;
    for (const auto& r : f.records) {
      if (r[0] == "anchor" && r.size() == 5) {
        std::string activity = r[4];
        std::replace(activity.begin(), activity.end(), '_', ' ');
        m.anchors.push_back(IsoAnchor{r[1], r[2], split(r[3], ','), activity});
      } else if (r[0] == "artifact" && r.size() == 3) {
        auto kind = parse_artifact_kind(r[1]);
        if (!kind) throw Error(ErrorCode::kFormatError, "unknown artifact kind " + r[1]);
        m.kind_anchor[*kind] = r[2];
      } else {
        throw Error(ErrorCode::kFormatError, "bad process map record " + r[0]);
      }
    }
    for (auto k : kAllKinds) {
      if (!m.kind_anchor.count(k)) {
        throw Error(ErrorCode::kFormatError,
                    "process map lacks " + std::string(artifact_kind_name(k)));
      }
    }
    return m;
  }();
  return map;
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

std::string iso_date(Timestamp t) {
  using namespace std::chrono;
  const year_month_day ymd{floor<days>(sys_seconds{seconds{t}})};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Json trait_json(const TraitVector& t) {
  Json j = Json::object();
  for (auto tr : kAllTraits) j[std::string(trait_letter(tr))] = round4(t[index(tr)]);
  return j;
}

Json aggregate_json(const monitor::PeriodAggregate& a) {
  return Json{{"period", a.period}, {"value", round4(a.value)}, {"count", a.count}};
}

Json trigger_json(const monitor::TriggerEvent& t) {
  Json evidence = Json::array();
  for (const auto& e : t.evidence) evidence.push_back(aggregate_json(e));
  Json j{{"id", t.id()},
         {"kind", std::string(monitor::trigger_kind_name(t.kind))},
         {"fired_at", t.fired_at},
         {"evidence", evidence}};
  if (!t.evidence.empty()) {
    j["baseline"] = round4(t.baseline);
    j["threshold"] = round4(t.threshold);
  }
  if (!t.note.empty()) j["note"] = t.note;
  return j;
}

Json role_counts_json(const std::array<int, role_model::kRoleCount>& counts) {
  Json j = Json::object();
  int total = 0;
  for (auto r : role_model::kAllRoles) {
    j[std::string(role_model::role_name(r))] = counts[role_model::index(r)];
    total += counts[role_model::index(r)];
  }
  j["total"] = total;
  return j;
}

std::string md_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else out += c;
  }
  return out;
}

std::string str(const Json& v) {
  if (v.is_null()) return "-";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return fixed(v.get<double>());
  return v.dump();
}

std::string render_matrix(const Json& b) {
  std::ostringstream o;
  o << "# Team Composition Matrix: " << b["team"].get<std::string>() << "\n\n";
  o << "| Member | O | C | E | A | N | Archetype | AI specialization | Recommended role | Current role |\n";
  o << "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : b["rows"]) {
    o << "| " << md_escape(r["member"].get<std::string>());
    for (const char* t : {"O", "C", "E", "A", "N"}) o << " | " << fixed(r["traits"][t].get<double>(), 2);
    o << " | " << str(r["archetype"]) << " | " << str(r["ai_specialization"]) << " | "
      << str(r["recommended_role"]) << " | " << str(r["current_role"]) << " |\n";
  }
  return o.str();
}

std::string render_backlog(const Json& b) {
  std::ostringstream o;
  const auto& pair = b["pair"];
  o << "# Pairing task: " << pair[0].get<std::string>() << " + " << pair[1].get<std::string>()
    << "\n\nSprint: " << b["sprint"].get<std::string>() << "\nScore: " << b["score"].get<int>()
    << "\n\n" << b["rationale"].get<std::string>() << "\n\n## Role rotation\n\n";
  for (const auto& m : pair) {
    const auto& roles = b["roles"][m.get<std::string>()];
    o << "- " << m.get<std::string>() << ":";
    for (const auto& r : roles) o << " " << r.get<std::string>();
    o << "\n";
  }
  const auto& review = b["role_review"];
  o << "\n## Role review (" << review["anchor"].get<std::string>() << ")\n\n";
  for (const auto& m : review["members"]) {
    o << "- " << m["member"].get<std::string>() << ": recommended "
      << str(m["recommended"]) << ", scheduled Pilot "
      << m["scheduled"]["Pilot"].get<int>() << " / Navigator " << m["scheduled"]["Navigator"].get<int>()
      << " / Solo " << m["scheduled"]["Solo"].get<int>() << "\n";
  }
  return o.str();
}

std::string render_trend(const Json& b) {
  std::ostringstream o;
  o << "# Sprint Motivation Trend: " << b["team"].get<std::string>() << "\n\nPeriod: "
    << b["period"]["label"].get<std::string>() << "\n";
  if (b["view"] == "team") {
    o << "\n| Week | Mean | Contributors | Mean delta |\n|---|---|---|---|\n";
    for (const auto& w : b["weeks"]) {
      o << "| " << w["week"].get<std::string>() << " | " << str(w["mean"]) << " | "
        << w["contributors"].get<int>() << " | " << str(w["mean_delta"]) << " |\n";
    }
    o << "\nWeeks suppressed (fewer than " << b["k"].get<int>()
      << " contributors): " << b["suppressed_weeks"].get<int>() << "\n";
    o << "Signals raised: " << b["trigger_count"].get<int>() << "\n";
    return o.str();
  }
  for (const auto& m : b["members"]) {
    o << "\n## " << m["member"].get<std::string>() << "\n\nBaseline: " << str(m["baseline"])
      << "\n\n| Week | Mean | Pulses | Delta |\n|---|---|---|---|\n";
    for (const auto& w : m["weeks"]) {
      o << "| " << w["week"].get<std::string>() << " | " << str(w["mean"]) << " | "
        << w["count"].get<int>() << " | " << str(w["delta"]) << " |\n";
    }
    for (const auto& t : m["triggers"]) {
      o << "\nSignal " << t["kind"].get<std::string>() << " (" << t["id"].get<std::string>() << ")";
      for (const auto& e : t["evidence"]) {
        o << "; " << e["period"].get<std::string>() << " = " << str(e["value"]);
      }
      o << "\n";
    }
  }
  return o.str();
}

std::string render_summary(const Json& b) {
  std::ostringstream o;
  o << "# Personality Optimization Summary: " << b["team"].get<std::string>() << "\n\n";
  auto pair_line = [&o](const Json& p) {
    o << "- " << p["pair"][0].get<std::string>() << " + " << p["pair"][1].get<std::string>()
      << ": mean " << str(p["mean"]) << " vs baseline " << str(p["baseline"]) << " (delta "
      << str(p["delta"]) << ", " << p["pulses"].get<int>() << " pulses)\n";
  };
  o << "## Top pair\n\n";
  if (b["top_pair"].is_null()) o << "None measured.\n";
  else pair_line(b["top_pair"]);
  o << "\n## Successful pairings\n\n";
  if (b["successful_pairings"].empty()) o << "None.\n";
  for (const auto& p : b["successful_pairings"]) pair_line(p);
  o << "\n## Failed experiments\n\n";
  if (b["failed_experiments"].empty()) o << "None.\n";
  for (const auto& p : b["failed_experiments"]) pair_line(p);
  if (!b["unmeasured_pairs"].empty()) {
    o << "\n## Pairs without pulses\n\n";
    for (const auto& p : b["unmeasured_pairs"]) {
      o << "- " << p[0].get<std::string>() << " + " << p[1].get<std::string>() << "\n";
    }
  }
  o << "\n## Role rotation\n\n| Member | Pilot | Navigator | Solo | Total |\n|---|---|---|---|---|\n";
  for (const auto& [member, c] : b["rotation"].items()) {
    o << "| " << md_escape(member) << " | " << c["Pilot"].get<int>() << " | "
      << c["Navigator"].get<int>() << " | " << c["Solo"].get<int>() << " | "
      << c["total"].get<int>() << " |\n";
  }
  o << "\n## Adaptation signals\n\n";
  if (b["triggers_by_kind"].empty()) o << "None.\n";
  for (const auto& [kind, n] : b["triggers_by_kind"].items()) {
    o << "- " << kind << ": " << n.get<int>() << "\n";
  }
  return o.str();
}

std::string delta_rule(double factor, const std::optional<double>& fixed_delta) {
  if (fixed_delta) return "fixed " + fixed(*fixed_delta);
  return fixed(factor, 2) + " x founding-pulse SD";
}

std::string bullet_list(const std::vector<std::string>& items) {
  if (items.empty()) return "None.";
  std::string out;
  for (const auto& i : items) out += (out.empty() ? "- " : "\n- ") + i;
  return out;
}

Json templated(std::string_view name, const std::map<std::string, std::string>& slots) {
  std::string path = "templates/" + std::string(name) + ".md";
  Json j{{"template", std::string(name)},
         {"slots", slots},
         {"text", fill_template(bundled::file(path), slots)}};
  return j;
}

}  // namespace

std::string_view artifact_kind_name(ArtifactKind k) noexcept {
  switch (k) {
    case ArtifactKind::kTeamCompositionMatrix: return "TeamCompositionMatrix";
    case ArtifactKind::kPairingBacklogItem: return "PairingBacklogItem";
    case ArtifactKind::kMotivationBaselineReport: return "MotivationBaselineReport";
    case ArtifactKind::kSprintMotivationTrend: return "SprintMotivationTrend";
    case ArtifactKind::kRetrospectiveGuide: return "RetrospectiveGuide";
    case ArtifactKind::kPersonalityOptimizationSummary: return "PersonalityOptimizationSummary";
    case ArtifactKind::kAssessmentPolicyRecord: return "AssessmentPolicyRecord";
  }
  return "?";
}

std::optional<ArtifactKind> parse_artifact_kind(std::string_view text) noexcept {
  for (auto k : kAllKinds) {
    if (artifact_kind_name(k) == text) return k;
  }
  return std::nullopt;
}

const std::vector<IsoAnchor>& anchors() { return process_map().anchors; }

const IsoAnchor& anchor(std::string_view code) {
  for (const auto& a : anchors()) {
    if (a.code == code) return a;
  }
  throw Error(ErrorCode::kUnknownAnchor, "unknown process anchor '" + std::string(code) + "'");
}

const IsoAnchor& anchor_for(ArtifactKind kind) {
  return anchor(process_map().kind_anchor.at(kind));
}

IsoArtifact IsoArtifact::make(ArtifactKind kind, std::string_view anchor_code, Json body,
                              Timestamp at) {
  const IsoAnchor& a = standards::anchor(anchor_code);
  if (a.code != anchor_for(kind).code) {
    throw Error(ErrorCode::kUnknownAnchor, std::string(artifact_kind_name(kind)) +
                                               " is not produced at " + a.code);
  }
  return IsoArtifact{kind, a, std::move(body), at};
}

Json IsoArtifact::to_json() const {
  return Json{{"kind", std::string(artifact_kind_name(kind))},
              {"anchor",
               {{"code", anchor.code}, {"process", anchor.process}, {"activity", anchor.activity},
                {"tasks", anchor.tasks}}},
              {"generated_at", generated_at},
              {"body", body}};
}

std::string IsoArtifact::machine() const { return to_json().dump(2) + "\n"; }

std::string IsoArtifact::markdown() const {
  switch (kind) {
    case ArtifactKind::kTeamCompositionMatrix: return render_matrix(body);
    case ArtifactKind::kPairingBacklogItem: return render_backlog(body);
    case ArtifactKind::kSprintMotivationTrend: return render_trend(body);
    case ArtifactKind::kPersonalityOptimizationSummary: return render_summary(body);
    case ArtifactKind::kMotivationBaselineReport:
    case ArtifactKind::kRetrospectiveGuide:
    case ArtifactKind::kAssessmentPolicyRecord: return body.at("text").get<std::string>();
  }
  return {};
}

std::string IsoArtifact::file_stem() const {
  std::string code = anchor.process == "SI" ? "SI." + anchor.code : anchor.code;
  return code + "_" + std::string(artifact_kind_name(kind)) + "_" + iso_date(generated_at);
}

std::string fill_template(std::string_view text, const std::map<std::string, std::string>& slots) {
  std::string out;
  std::size_t pos = 0;
  for (;;) {
    auto open = text.find("{{", pos);
    if (open == std::string_view::npos) break;
    auto close = text.find("}}", open + 2);
    if (close == std::string_view::npos) throw Error(ErrorCode::kFormatError, "unterminated slot");
    std::string name(text.substr(open + 2, close - open - 2));
    auto it = slots.find(name);
    if (it == slots.end()) throw Error(ErrorCode::kFormatError, "no value for slot '" + name + "'");
    out.append(text.substr(pos, open - pos));
    out += it->second;
    pos = close + 2;
  }
  out.append(text.substr(pos));
  return out;
}

std::string fixed(double v, int decimals) {
  double r = std::round(v * std::pow(10.0, decimals)) / std::pow(10.0, decimals);
  if (r == 0.0) r = 0.0;  // no "-0.0000"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, r);
  return buf;
}

IsoArtifact team_composition_matrix(std::string_view team_id,
                                    std::span<const MatrixMember> members, Timestamp at) {
  if (members.empty()) {
    throw Error(ErrorCode::kIncompleteAssessments, "team " + std::string(team_id) + " has no members");
  }
  Json rows = Json::array();
  for (const auto& m : members) {
    if (!m.profile || !m.archetype || !m.recommendation) {
      throw Error(ErrorCode::kIncompleteAssessments,
                  "member " + m.member + " has no personality assessment");
    }
    rows.push_back(Json{
        {"member", m.member},
        {"traits", trait_json(m.profile->traits)},
        {"archetype", std::string(role_model::archetype_name(*m.archetype))},
        {"ai_specialization",
         std::string(role_model::specialization_name(role_model::specialization_of(*m.archetype)))},
        {"recommended_role", std::string(role_model::role_name(m.recommendation->chosen))},
        {"current_role",
         m.current_role ? Json(std::string(role_model::role_name(*m.current_role))) : Json(nullptr)}});
  }
  Json body{{"team", std::string(team_id)},
            {"columns",
             {"member", "traits", "archetype", "ai_specialization", "recommended_role", "current_role"}},
            {"rows", rows}};
  return IsoArtifact::make(ArtifactKind::kTeamCompositionMatrix,
                           anchor_for(ArtifactKind::kTeamCompositionMatrix).code, std::move(body), at);
}

std::vector<IsoArtifact> pairing_backlog_items(std::span<const pairing::PairScore> pairs,
                                               std::span<const PlanMember> members,
                                               std::string_view sprint_id, Timestamp at) {
  std::map<std::string, const PlanMember*> by_id;
  for (const auto& m : members) by_id[m.member] = &m;
  const IsoAnchor& review_anchor = anchor(kRoleReviewAnchor);

  std::vector<IsoArtifact> out;
  for (const auto& p : pairs) {
    Json roles = Json::object();
    Json review_members = Json::array();
    for (const auto& id : {p.member_a, p.member_b}) {
      auto it = by_id.find(id);
      Json seq = Json::array();
      std::array<int, role_model::kRoleCount> counts{};
      Json recommended = nullptr;
      if (it != by_id.end()) {
        for (auto r : it->second->schedule) {
          seq.push_back(std::string(role_model::role_name(r)));
          ++counts[role_model::index(r)];
        }
        recommended = std::string(role_model::role_name(it->second->recommended));
      }
      roles[id] = seq;
      Json counts_json = role_counts_json(counts);
      counts_json.erase("total");
      review_members.push_back(Json{{"member", id}, {"recommended", recommended}, {"scheduled", counts_json}});
    }
    Json flags = Json::array();
    if (p.has(pairing::PairFlag::kSynergy)) flags.push_back("synergy");
    if (p.has(pairing::PairFlag::kCaution)) flags.push_back("caution");
    if (p.has(pairing::PairFlag::kForbidden)) flags.push_back("forbidden");
    Json body{{"sprint", std::string(sprint_id)},
              {"pair", {p.member_a, p.member_b}},
              {"archetypes",
               {std::string(role_model::archetype_name(p.archetype_a)),
                std::string(role_model::archetype_name(p.archetype_b))}},
              {"score", p.score},
              {"flags", flags},
              {"rationale_tags", p.rationale},
              {"rationale", pairing::explain_pair(p)},
              {"roles", roles},
              {"role_review",
               {{"anchor", review_anchor.code},
                {"activity", review_anchor.activity},
                {"members", review_members}}}};
    out.push_back(IsoArtifact::make(ArtifactKind::kPairingBacklogItem,
                                    anchor_for(ArtifactKind::kPairingBacklogItem).code,
                                    std::move(body), at));
  }
  return out;
}

IsoArtifact motivation_report(std::string_view team_id, std::span<const MemberMotivation> members,
                              const ReportPeriod& period, bool anonymized,
                              const monitor::MonitorConfig& config, Timestamp at) {
  if (anonymized && members.size() < kAnonymityThreshold) {
    throw Error(ErrorCode::kAnonymityThreshold,
                "anonymized view needs at least " + std::to_string(kAnonymityThreshold) +
                    " members, team has " + std::to_string(members.size()));
  }
  auto in_period = [&period](Timestamp t) { return t >= period.from && t < period.to; };

  struct MemberSeries {
    const MemberMotivation* m;
    std::vector<monitor::PeriodAggregate> weeks;
    std::vector<const monitor::TriggerEvent*> triggers;
  };
  std::vector<MemberSeries> series;
  std::size_t pulses = 0;
  for (const auto& m : members) {
    std::vector<psychometrics::MotivationSample> window;
    for (const auto& s : m.samples) {
      if (s.instrument == psychometrics::InstrumentKind::kImiIe && in_period(s.taken_at)) {
        window.push_back(s);
      }
    }
    pulses += window.size();
    MemberSeries ms{&m, monitor::weekly_series(window, config), {}};
    for (const auto& t : m.triggers) {
      if (in_period(t.fired_at)) ms.triggers.push_back(&t);
    }
    series.push_back(std::move(ms));
  }
  if (pulses == 0) {
    throw Error(ErrorCode::kNoData, "no pulses in period " + period.label + " [" +
                                        iso_date(period.from) + ", " + iso_date(period.to) + ")");
  }
  std::sort(series.begin(), series.end(),
            [](const MemberSeries& a, const MemberSeries& b) { return a.m->member < b.m->member; });

  Json body{{"team", std::string(team_id)},
            {"period", {{"label", period.label}, {"from", period.from}, {"to", period.to}}},
            {"k", kAnonymityThreshold}};

  if (!anonymized) {
    body["view"] = "member";
    Json rows = Json::array();
    for (const auto& ms : series) {
      const auto& b = ms.m->baseline;
      Json weeks = Json::array();
      for (const auto& w : ms.weeks) {
        weeks.push_back(Json{{"week", w.period},
                             {"mean", round4(w.value)},
                             {"count", w.count},
                             {"delta", b ? Json(round4(w.value - b->imi)) : Json(nullptr)}});
      }
      Json triggers = Json::array();
      for (const auto* t : ms.triggers) triggers.push_back(trigger_json(*t));
      rows.push_back(Json{{"member", ms.m->member},
                          {"baseline", b ? Json(round4(b->imi)) : Json(nullptr)},
                          {"weeks", weeks},
                          {"triggers", triggers}});
    }
    body["members"] = rows;
  } else {
    body["view"] = "team";
    struct WeekAcc {
      std::vector<double> means;
      std::vector<double> deltas;
    };
    std::map<std::string, WeekAcc> weeks;
    std::size_t trigger_count = 0;
    for (const auto& ms : series) {
      for (const auto& w : ms.weeks) {
        auto& acc = weeks[w.period];
        acc.means.push_back(w.value);
        if (ms.m->baseline) acc.deltas.push_back(w.value - ms.m->baseline->imi);
      }
      trigger_count += ms.triggers.size();
    }
    auto mean = [](const std::vector<double>& v) {
      return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    Json rows = Json::array();
    int suppressed = 0;
    for (const auto& [label, acc] : weeks) {
      if (acc.means.size() < kAnonymityThreshold) {
        ++suppressed;
        continue;
      }
      rows.push_back(Json{{"week", label},
                          {"mean", round4(mean(acc.means))},
                          {"contributors", acc.means.size()},
                          {"mean_delta", acc.deltas.size() >= kAnonymityThreshold
                                             ? Json(round4(mean(acc.deltas)))
                                             : Json(nullptr)}});
    }
    body["weeks"] = rows;
    body["suppressed_weeks"] = suppressed;
    body["trigger_count"] = trigger_count;
  }
  return IsoArtifact::make(ArtifactKind::kSprintMotivationTrend,
                           anchor_for(ArtifactKind::kSprintMotivationTrend).code, std::move(body), at);
}

IsoArtifact closure_summary(const ProjectHistory& history, Timestamp at) {
  if (!history.closed) {
    throw Error(ErrorCode::kProjectOpen, "project of team " + history.team_id + " is still open");
  }
  struct Measured {
    const PairHistory* p;
    double mean;
    double delta;
  };
  std::vector<Measured> measured;
  Json unmeasured = Json::array();
  for (const auto& p : history.pairs) {
    if (p.motivation.empty()) {
      unmeasured.push_back({p.member_a, p.member_b});
      continue;
    }
    double m = std::accumulate(p.motivation.begin(), p.motivation.end(), 0.0) /
               static_cast<double>(p.motivation.size());
    measured.push_back({&p, m, m - p.baseline});
  }
  std::sort(measured.begin(), measured.end(), [](const Measured& a, const Measured& b) {
    if (a.delta != b.delta) return a.delta > b.delta;
    if (a.p->member_a != b.p->member_a) return a.p->member_a < b.p->member_a;
    return a.p->member_b < b.p->member_b;
  });
  auto pair_json = [](const Measured& m) {
    return Json{{"pair", {m.p->member_a, m.p->member_b}},
                {"sprints", m.p->sprints},
                {"pulses", m.p->motivation.size()},
                {"mean", round4(m.mean)},
                {"baseline", round4(m.p->baseline)},
                {"delta", round4(m.delta)}};
  };
  Json ok = Json::array();
  Json failed = Json::array();
  for (const auto& m : measured) {
    (m.mean >= m.p->baseline ? ok : failed).push_back(pair_json(m));
  }
  Json rotation = Json::object();
  std::array<int, role_model::kRoleCount> totals{};
  for (const auto& [member, counts] : history.role_counts) {
    rotation[member] = role_counts_json(counts);
    for (std::size_t i = 0; i < totals.size(); ++i) totals[i] += counts[i];
  }
  Json body{{"team", history.team_id},
            {"success_rule", "mean pulse while paired >= mean of the two baselines"},
            {"top_pair", measured.empty() ? Json(nullptr) : pair_json(measured.front())},
            {"successful_pairings", ok},
            {"failed_experiments", failed},
            {"unmeasured_pairs", unmeasured},
            {"rotation", rotation},
            {"rotation_totals", role_counts_json(totals)},
            {"triggers_by_kind", history.triggers_by_kind}};
  return IsoArtifact::make(ArtifactKind::kPersonalityOptimizationSummary,
                           anchor_for(ArtifactKind::kPersonalityOptimizationSummary).code,
                           std::move(body), at);
}

IsoArtifact assessment_policy_record(const PolicyInputs& in, Timestamp at) {
  const IsoAnchor& a = anchor_for(ArtifactKind::kAssessmentPolicyRecord);
  std::map<std::string, std::string> slots{
      {"team", in.team_id},
      {"anchor", a.code},
      {"activity", a.activity},
      {"policy_version", in.policy_version},
      {"instruments", bullet_list(in.instruments)},
      {"reassessment_days", std::to_string(in.reassessment_days)},
      {"consent_scopes", in.consent_scopes.empty() ? "none" : [&] {
         std::string s;
         for (const auto& c : in.consent_scopes) s += (s.empty() ? "" : ", ") + c;
         return s;
       }()},
      {"hash", in.hash},
      {"anonymity_k", std::to_string(in.anonymity_k)},
      {"high_threshold", fixed(in.high_threshold, 3)},
      {"founding_samples", std::to_string(in.founding_samples)},
      {"delta_rule", delta_rule(in.delta_sd_factor, in.fixed_delta)},
  };
  return IsoArtifact::make(ArtifactKind::kAssessmentPolicyRecord, a.code,
                           templated("assessment_policy", slots), at);
}

IsoArtifact baseline_report(std::string_view team_id, std::span<const MemberMotivation> members,
                            const monitor::MonitorConfig& config, Timestamp at) {
  const IsoAnchor& a = anchor_for(ArtifactKind::kMotivationBaselineReport);
  std::vector<const MemberMotivation*> sorted;
  for (const auto& m : members) sorted.push_back(&m);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* x, const auto* y) { return x->member < y->member; });

  Json rows = Json::array();
  Json pending = Json::array();
  std::string table =
      "| Member | IMI baseline | IMI SD | MWMS baseline | Founding pulses | Established | Version |\n"
      "|---|---|---|---|---|---|---|";
  for (const auto* m : sorted) {
    if (!m->baseline) {
      pending.push_back(m->member);
      continue;
    }
    const auto& b = *m->baseline;
    rows.push_back(Json{{"member", m->member},
                        {"imi", round4(b.imi)},
                        {"imi_sd", round4(b.imi_sd)},
                        {"mwms", b.mwms ? Json(round4(*b.mwms)) : Json(nullptr)},
                        {"established_from", b.established_from},
                        {"established_at", b.established_at},
                        {"version", b.version}});
    table += "\n| " + md_escape(m->member) + " | " + fixed(b.imi) + " | " + fixed(b.imi_sd) + " | " +
             (b.mwms ? fixed(*b.mwms) : std::string("-")) + " | " +
             std::to_string(b.established_from) + " | " + iso_date(b.established_at) + " | " +
             std::to_string(b.version) + " |";
  }
  if (!pending.empty()) {
    table += "\n\nWaiting for founding pulses:";
    for (const auto& p : pending) table += " " + p.get<std::string>();
  }
  std::map<std::string, std::string> slots{
      {"team", std::string(team_id)},
      {"anchor", a.code},
      {"activity", a.activity},
      {"baseline_count", std::to_string(rows.size())},
      {"member_count", std::to_string(sorted.size())},
      {"baseline_table", table},
      {"founding_samples", std::to_string(config.founding_samples)},
  };
  Json body = templated("baseline_report", slots);
  body["baselines"] = rows;
  body["pending"] = pending;
  return IsoArtifact::make(ArtifactKind::kMotivationBaselineReport, a.code, std::move(body), at);
}

IsoArtifact retrospective_guide(const RetrospectiveInputs& in, Timestamp at) {
  const IsoAnchor& a = anchor_for(ArtifactKind::kRetrospectiveGuide);
  std::vector<std::string> trend;
  for (const auto& w : in.team_trend) {
    trend.push_back(w.period + ": " + fixed(w.value) + " (" + std::to_string(w.count) + " members)");
  }
  std::map<std::string, int> by_kind;
  for (const auto& t : in.triggers) ++by_kind[std::string(monitor::trigger_kind_name(t.kind))];
  std::vector<std::string> signals;
  for (const auto& [k, n] : by_kind) signals.push_back(k + ": " + std::to_string(n));
  std::vector<std::string> pairs;
  for (const auto& p : in.pairs) pairs.push_back(pairing::explain_pair(p));

  std::map<std::string, std::string> slots{
      {"team", in.team_id},
      {"sprint", in.sprint_id},
      {"anchor", a.code},
      {"activity", a.activity},
      {"trend", trend.empty() ? "No week with enough contributors to show." : bullet_list(trend)},
      {"signals", bullet_list(signals)},
      {"pairs", bullet_list(pairs)},
  };
  Json body = templated("retrospective_guide", slots);
  body["signals_by_kind"] = by_kind;
  return IsoArtifact::make(ArtifactKind::kRetrospectiveGuide, a.code, std::move(body), at);
}

}  // namespace roma::standards
