#include "roma/service.hpp"

#include <algorithm>
#include <chrono>
#include <mutex>
#include <numeric>
#include <set>
#include <shared_mutex>

#include "roma/batch.hpp"
#include "roma/error.hpp"
#include "roma/standards.hpp"
#include "store.hpp"

namespace roma::service {
namespace {

using psychometrics::InstrumentKind;
using psychometrics::MotivationSample;
using role_model::Role;

constexpr int kStateVersion = 1;

const std::vector<std::string> kOperations = {
    "create_team",   "register_member", "grant_consent",  "revoke_consent", "submit_assessment",
    "submit_pulse",  "get_profile",     "get_team",       "recommend",      "accept_or_adjust",
    "report",        "signal",          "list_triggers",  "set_sprint",     "close_project",
    "verify",        "export_memos",
};

const std::set<std::string, std::less<>> kReadOnly = {"get_profile", "get_team", "list_triggers",
                                                      "verify", "export_memos"};

// ---- request helpers ------------------------------------------------------

[[noreturn]] void bad_request(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, what);
}

std::string req_string(const Json& req, const char* key) {
  if (!req.contains(key) || !req[key].is_string() || req[key].get<std::string>().empty()) {
    bad_request(std::string("request needs a non-empty string '") + key + "'");
  }
  return req[key].get<std::string>();
}

std::optional<std::string> opt_string(const Json& req, const char* key) {
  if (!req.contains(key) || req[key].is_null()) return std::nullopt;
  if (!req[key].is_string()) bad_request(std::string("'") + key + "' must be a string");
  return req[key].get<std::string>();
}

std::optional<Timestamp> opt_time(const Json& req, const char* key) {
  if (!req.contains(key) || req[key].is_null()) return std::nullopt;
  if (!req[key].is_number_integer()) bad_request(std::string("'") + key + "' must be an integer timestamp");
  return req[key].get<Timestamp>();
}

bool opt_bool(const Json& req, const char* key, bool fallback) {
  if (!req.contains(key) || req[key].is_null()) return fallback;
  if (!req[key].is_boolean()) bad_request(std::string("'") + key + "' must be a boolean");
  return req[key].get<bool>();
}

// Scoring errors surface as ValidationFailure naming the original problem.
template <typename F>
auto validated(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::kMissingItem:
      case ErrorCode::kDuplicateItem:
      case ErrorCode::kUnknownItem:
      case ErrorCode::kOutOfScaleValue:
        throw Error(ErrorCode::kValidationFailure,
                    std::string(error_code_name(e.code())) + ": " + e.what());
      default:
        throw;
    }
  }
}

// ---- state <-> domain -----------------------------------------------------

Json traits_json(const TraitVector& t) {
  Json j = Json::array();
  for (double v : t) j.push_back(v);
  return j;
}

TraitVector traits_from(const Json& j) {
  TraitVector t{};
  for (std::size_t i = 0; i < kTraitCount; ++i) t[i] = j.at(i).get<double>();
  return t;
}

Json trait_map(const TraitVector& t) {
  Json j = Json::object();
  for (auto tr : kAllTraits) j[std::string(trait_letter(tr))] = t[index(tr)];
  return j;
}

Json subscales_json(const psychometrics::SubscaleScores& s) {
  Json j = Json::array();
  for (const auto& [name, v] : s) j.push_back(Json::array({name, v}));
  return j;
}

psychometrics::SubscaleScores subscales_from(const Json& j) {
  psychometrics::SubscaleScores s;
  for (const auto& e : j) s.emplace_back(e.at(0).get<std::string>(), e.at(1).get<double>());
  return s;
}

Json sample_json(const MotivationSample& s, const std::string& instrument_name) {
  return Json{{"session", s.session_id},
              {"role_context", std::string(psychometrics::role_context_name(s.role_context))},
              {"raw", s.raw_score},
              {"normalized", s.normalized},
              {"instrument", std::string(psychometrics::instrument_kind_name(s.instrument))},
              {"instrument_name", instrument_name},
              {"taken_at", s.taken_at},
              {"subscales", subscales_json(s.subscales)}};
}

MotivationSample sample_from(const Json& j, const std::string& member_id) {
  MotivationSample s;
  s.member_id = member_id;
  s.session_id = j.at("session").get<std::string>();
  s.role_context = *psychometrics::parse_role_context(j.at("role_context").get<std::string>());
  s.raw_score = j.at("raw").get<double>();
  s.normalized = j.at("normalized").get<double>();
  s.instrument = *psychometrics::parse_instrument_kind(j.at("instrument").get<std::string>());
  s.taken_at = j.at("taken_at").get<Timestamp>();
  s.subscales = subscales_from(j.at("subscales"));
  return s;
}

Json baseline_json(const monitor::Baseline& b) {
  return Json{{"version", b.version},
              {"imi", b.imi},
              {"imi_sd", b.imi_sd},
              {"mwms", b.mwms ? Json(*b.mwms) : Json(nullptr)},
              {"mwms_sd", b.mwms_sd},
              {"mwms_subscales", subscales_json(b.mwms_subscales)},
              {"established_from", b.established_from},
              {"established_at", b.established_at}};
}

monitor::Baseline baseline_from(const Json& j, const std::string& member_id) {
  monitor::Baseline b;
  b.member_id = member_id;
  b.version = j.at("version").get<int>();
  b.imi = j.at("imi").get<double>();
  b.imi_sd = j.at("imi_sd").get<double>();
  if (!j.at("mwms").is_null()) b.mwms = j["mwms"].get<double>();
  b.mwms_sd = j.at("mwms_sd").get<double>();
  b.mwms_subscales = subscales_from(j.at("mwms_subscales"));
  b.established_from = j.at("established_from").get<std::size_t>();
  b.established_at = j.at("established_at").get<Timestamp>();
  return b;
}

Json pairs_json(const std::vector<std::pair<std::string, std::string>>& pairs) {
  Json j = Json::array();
  for (const auto& [a, b] : pairs) j.push_back(Json::array({a, b}));
  return j;
}

Json recommendation_json(const role_model::RoleRecommendation& r) {
  Json scores = Json::object();
  for (auto role : role_model::kAllRoles) scores[std::string(role_model::role_name(role))] = r.score(role);
  Json ranked = Json::array();
  for (auto role : r.ranked) ranked.push_back(std::string(role_model::role_name(role)));
  return Json{{"scores", scores}, {"ranked", ranked}, {"chosen", std::string(role_model::role_name(r.chosen))}};
}

Json trigger_json(const monitor::TriggerEvent& t) {
  Json evidence = Json::array();
  for (const auto& e : t.evidence) {
    evidence.push_back(Json{{"period", e.period}, {"value", e.value}, {"count", e.count}});
  }
  return Json{{"id", t.id()},
              {"member", t.member_id},
              {"kind", std::string(monitor::trigger_kind_name(t.kind))},
              {"evidence", evidence},
              {"baseline", t.baseline},
              {"delta", t.delta},
              {"threshold", t.threshold},
              {"note", t.note},
              {"fired_at", t.fired_at}};
}

Json intervention_json(const monitor::Intervention& i) {
  Json j{{"kind", std::string(monitor::intervention_kind_name(i.kind))}, {"detail", i.detail}};
  if (i.from_role) j["from_role"] = std::string(role_model::role_name(*i.from_role));
  if (i.to_role) j["to_role"] = std::string(role_model::role_name(*i.to_role));
  if (i.current_partner) j["current_partner"] = *i.current_partner;
  return j;
}

Json& team_at(Json& state, const std::string& team) { return state["teams"].at(team); }
Json& member_at(Json& state, const std::string& subject) { return state["members"].at(subject); }

Timestamp system_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

Json empty_state() {
  return Json{{"v", kStateVersion}, {"teams", Json::object()}, {"members", Json::object()}};
}

void apply_event(Json& state, std::string_view kind, const Json& d) {
  const Timestamp at = d.at("at").get<Timestamp>();
  if (kind == "team.created") {
    state["teams"][d.at("team").get<std::string>()] =
        Json{{"lead_token_digest", d.at("lead_token_digest")},
             {"members", Json::array()},
             {"sprint", nullptr},
             {"closed", false},
             {"closed_at", nullptr},
             {"proposal", nullptr},
             {"proposal_count", 0},
             {"committed", nullptr},
             {"assignments", Json::array()},
             {"signals", Json::array()},
             {"artifacts", Json::array()},
             {"created_at", at}};
  } else if (kind == "member.registered") {
    const std::string subject = d.at("subject").get<std::string>();
    team_at(state, d.at("team").get<std::string>())["members"].push_back(subject);
    state["members"][subject] = Json{{"team", d.at("team")},
                                     {"consent", nullptr},
                                     {"revoked_at", nullptr},
                                     {"profile", nullptr},
                                     {"archetype", nullptr},
                                     {"samples", Json::array()},
                                     {"baseline", nullptr},
                                     {"triggers", Json::array()},
                                     {"current_role", nullptr}};
  } else if (kind == "consent.granted") {
    Json& m = member_at(state, d.at("subject").get<std::string>());
    std::set<std::string> scopes;
    if (!m["consent"].is_null()) {
      for (const auto& s : m["consent"]["scopes"]) scopes.insert(s.get<std::string>());
    }
    for (const auto& s : d.at("scopes")) scopes.insert(s.get<std::string>());
    m["consent"] = Json{{"scopes", scopes}, {"granted_at", at}};
  } else if (kind == "consent.revoked") {
    Json& m = member_at(state, d.at("subject").get<std::string>());
    m["revoked_at"] = at;
    m["consent"] = nullptr;
    m["profile"] = nullptr;
    m["archetype"] = nullptr;
    m["samples"] = Json::array();
    m["baseline"] = nullptr;
    m["triggers"] = Json::array();
    m["current_role"] = nullptr;
  } else if (kind == "assessment.recorded") {
    Json& m = member_at(state, d.at("subject").get<std::string>());
    m["profile"] = Json{{"traits", d.at("traits")},
                        {"z", d.at("z")},
                        {"instrument", d.at("instrument")},
                        {"source", d.at("source")},
                        {"assessed_at", d.at("assessed_at")}};
    m["archetype"] = d.at("archetype");
  } else if (kind == "motivation.recorded") {
    Json& m = member_at(state, d.at("subject").get<std::string>());
    m["samples"].push_back(d.at("sample"));
    if (d.contains("baseline") && !d["baseline"].is_null()) m["baseline"] = d["baseline"];
    for (const auto& t : d.at("triggers")) m["triggers"].push_back(t);
  } else if (kind == "recommendation.issued") {
    Json& t = team_at(state, d.at("team").get<std::string>());
    const int version = d.at("version").get<int>();
    t["proposal"] = Json{{"version", version},
                         {"digest", d.at("digest")},
                         {"pairs", d.at("pairs")},
                         {"unpaired", d.at("unpaired")},
                         {"total_score", d.at("total_score")},
                         {"at", at}};
    t["proposal_count"] = std::max(t["proposal_count"].get<int>(), version);
  } else if (kind == "assignment.committed") {
    Json& t = team_at(state, d.at("team").get<std::string>());
    t["committed"] = Json{{"proposal_version", d.at("proposal_version")},
                          {"pairs", d.at("pairs")},
                          {"unpaired", d.at("unpaired")},
                          {"roles", d.at("roles")},
                          {"actor", d.at("actor")},
                          {"override", d.at("override")},
                          {"sprint", d.at("sprint")},
                          {"at", at}};
    t["assignments"].push_back(Json{{"pairs", d.at("pairs")}, {"sprint", d.at("sprint")}, {"at", at}});
    for (const auto& [subject, role] : d.at("roles").items()) {
      member_at(state, subject)["current_role"] = role;
    }
  } else if (kind == "artifact.generated") {
    team_at(state, d.at("team").get<std::string>())["artifacts"].push_back(
        Json{{"kind", d.at("kind")}, {"digest", d.at("digest")}, {"at", at}});
  } else if (kind == "signal.recorded") {
    team_at(state, d.at("team").get<std::string>())["signals"].push_back(
        Json{{"kind", d.at("kind")}, {"subject", d.at("subject")}, {"note", d.at("note")},
             {"signal_at", d.at("signal_at")}, {"at", at}});
  } else if (kind == "sprint.started") {
    team_at(state, d.at("team").get<std::string>())["sprint"] =
        Json{{"id", d.at("sprint")}, {"index", d.at("index")}, {"started_at", at}};
  } else if (kind == "project.closed") {
    Json& t = team_at(state, d.at("team").get<std::string>());
    t["closed"] = true;
    t["closed_at"] = at;
  } else {
    throw Error(ErrorCode::kFormatError, "unknown event kind '" + std::string(kind) + "'");
  }
}

struct Service::Impl {
  std::filesystem::path data_dir;
  ConfigBundle bundle;
  ServiceOptions options;
  std::unique_ptr<Store> store;
  std::unique_ptr<ledger::Ledger> ledger;
  std::string salt;
  std::string token_secret;

  std::mutex write_mu;
  mutable std::shared_mutex state_mu;
  Json state;
  std::uint64_t applied = 0;
  std::uint64_t replayed = 0;

  Impl(std::filesystem::path dir, ConfigBundle b, ServiceOptions o)
      : data_dir(std::move(dir)), bundle(std::move(b)), options(std::move(o)) {}

  const ServiceConfig& cfg() const { return bundle.config(); }
  Timestamp now() const { return options.clock ? options.clock() : system_now(); }

  std::string secret(const std::optional<std::string>& configured, const std::string& key) {
    if (configured) return *configured;
    if (auto v = store->get(key)) return *v;
    std::string fresh = crypto::random_hex(32);
    store->put(key, fresh);
    return fresh;
  }

  std::string subject_of(const std::string& member_id) const {
    return crypto::to_hex(crypto::hmac_sha256(salt, member_id));
  }

  std::string pulse_token(const std::string& member_id) const {
    return crypto::to_hex(crypto::hmac_sha256(token_secret, "pulse:" + member_id));
  }

  std::string member_id_of(const std::string& subject) const {
    auto row = store->directory_by_subject(subject);
    if (!row) throw Error(ErrorCode::kNotFound, "member directory entry missing");
    return row->member_id;
  }

  // Falls back to the pseudonymous subject when the directory row is gone.
  std::string name_or_subject(const std::string& subject) const {
    auto row = store->directory_by_subject(subject);
    return row ? row->member_id : subject;
  }

  // ---- write path ----

  std::uint64_t commit(std::string_view kind, Json data) {
    const Timestamp at = now();
    data["at"] = at;
    ledger::LedgerEntry e = ledger->append(kind, at, data);
    if (options.after_append) options.after_append(e.seq);
    {
      std::unique_lock lock(state_mu);
      apply_event(state, e.kind, e.data());
      applied = e.seq;
    }
    store->put_state(ledger::canonical(state), e.seq);
    return e.seq;
  }

  // ---- lookups (caller holds a state lock or the write lock) ----

  const Json& team(const std::string& id) const {
    auto it = state["teams"].find(id);
    if (it == state["teams"].end()) throw Error(ErrorCode::kNotFound, "unknown team '" + id + "'");
    return *it;
  }

  const Json& open_team(const std::string& id) const {
    const Json& t = team(id);
    if (t["closed"].get<bool>()) throw Error(ErrorCode::kConflict, "project of team '" + id + "' is closed");
    return t;
  }

  // Returns (subject, member state) for a member of `team_id`.
  std::pair<std::string, const Json*> member(const std::string& team_id, const std::string& member_id) const {
    std::string subject = subject_of(member_id);
    auto it = state["members"].find(subject);
    if (it == state["members"].end() || (*it)["team"] != team_id) {
      throw Error(ErrorCode::kNotFound, "member '" + member_id + "' is not in team '" + team_id + "'");
    }
    return {subject, &*it};
  }

  static bool revoked(const Json& m) { return !m["revoked_at"].is_null(); }

  // Active (non-revoked) members in registration order.
  std::vector<std::string> active_subjects(const Json& t) const {
    std::vector<std::string> out;
    for (const auto& s : t["members"]) {
      if (!revoked(state["members"][s.get<std::string>()])) out.push_back(s.get<std::string>());
    }
    return out;
  }

  ZVector z_of(const Json& m) const {
    ZVector z{};
    for (std::size_t i = 0; i < kTraitCount; ++i) z[i] = m["profile"]["z"].at(i).get<double>();
    return z;
  }

  role_model::ArchetypeKind archetype_of(const Json& m) const {
    return *role_model::parse_archetype(m["archetype"].get<std::string>());
  }

  std::vector<MotivationSample> samples_of(const Json& m, const std::string& member_id) const {
    std::vector<MotivationSample> out;
    for (const auto& s : m["samples"]) out.push_back(sample_from(s, member_id));
    return out;
  }

  std::optional<monitor::Baseline> baseline_of(const Json& m, const std::string& member_id) const {
    if (m["baseline"].is_null()) return std::nullopt;
    return baseline_from(m["baseline"], member_id);
  }

  struct Assessed {
    std::string subject;
    std::string member_id;
    const Json* state;
    pairing::TeamMember member;
    role_model::RoleRecommendation recommendation;
  };

  // Throws IncompleteAssessments when an active member lacks a profile.
  std::vector<Assessed> assessed_members(const Json& t, const std::string& team_id) const {
    std::vector<Assessed> out;
    for (const auto& subject : active_subjects(t)) {
      const Json& m = state["members"][subject];
      std::string id = member_id_of(subject);
      if (m["profile"].is_null()) {
        throw Error(ErrorCode::kIncompleteAssessments,
                    "member " + id + " of team " + team_id + " has no personality assessment");
      }
      ZVector z = z_of(m);
      auto rec = role_model::score_roles(z, bundle.model());
      pairing::TeamMember tm{id, archetype_of(m), z, rec.score(Role::kSolo)};
      out.push_back(Assessed{subject, id, &m, tm, rec});
    }
    return out;
  }

  std::vector<monitor::TriggerEvent> triggers_for(const Json& m, const std::string& member_id) const {
    auto b = baseline_of(m, member_id);
    if (!b) return {};
    auto samples = samples_of(m, member_id);
    return monitor::evaluate_triggers(member_id, &*b, samples, cfg().monitor);
  }

  // ---- operations ----

  Json create_team(const Json& req) {
    std::string team_id = req_string(req, "team");
    if (state["teams"].contains(team_id)) throw Error(ErrorCode::kConflict, "team '" + team_id + "' exists");
    std::string token = crypto::random_hex(32);
    auto seq = commit("team.created",
                      Json{{"team", team_id}, {"lead_token_digest", crypto::to_hex(crypto::sha256(token))}});
    return Json{{"team", team_id}, {"lead_token", token}, {"seq", seq}};
  }

  Json register_member(const Json& req) {
    std::string team_id = req_string(req, "team");
    std::string member_id = req_string(req, "member");
    const Json& t = open_team(team_id);
    std::string subject = subject_of(member_id);
    if (state["members"].contains(subject)) {
      throw Error(ErrorCode::kConflict, "member '" + member_id + "' is already registered");
    }
    if (t["members"].size() >= cfg().max_team_size) {
      throw Error(ErrorCode::kConflict, "team '" + team_id + "' already has " +
                                            std::to_string(cfg().max_team_size) + " members");
    }
    store->directory_put(DirectoryRow{subject, member_id, team_id, opt_string(req, "display_name")});
    auto seq = commit("member.registered", Json{{"team", team_id}, {"subject", subject}});
    return Json{{"team", team_id}, {"member", member_id}, {"pulse_token", pulse_token(member_id)}, {"seq", seq}};
  }

  Json grant_consent(const Json& req) {
    std::string team_id = req_string(req, "team");
    open_team(team_id);
    auto [subject, m] = member(team_id, req_string(req, "member"));
    if (revoked(*m)) throw Error(ErrorCode::kConsentRevoked, "consent was revoked and cannot be re-granted");
    Json scopes = req.value("scopes", Json::array({"personality", "motivation"}));
    if (!scopes.is_array() || scopes.empty()) bad_request("'scopes' must be a non-empty array");
    for (const auto& s : scopes) {
      if (s != "personality" && s != "motivation") bad_request("unknown consent scope " + s.dump());
    }
    auto seq = commit("consent.granted", Json{{"subject", subject}, {"scopes", scopes}});
    return Json{{"member", req["member"]}, {"scopes", state["members"][subject]["consent"]["scopes"]}, {"seq", seq}};
  }

  Json revoke_consent(const Json& req) {
    std::string team_id = req_string(req, "team");
    team(team_id);
    auto [subject, m] = member(team_id, req_string(req, "member"));
    if (revoked(*m)) throw Error(ErrorCode::kConsentRevoked, "consent already revoked");
    store->directory_tombstone(subject);
    auto seq = commit("consent.revoked", Json{{"subject", subject}});
    return Json{{"member", req["member"]}, {"revoked", true}, {"seq", seq}};
  }

  void require_consent(const Json& m, const std::string& scope) const {
    if (revoked(m)) throw Error(ErrorCode::kConsentRevoked, "member revoked consent");
    if (m["consent"].is_null()) throw Error(ErrorCode::kNoConsent, "no consent recorded");
    for (const auto& s : m["consent"]["scopes"]) {
      if (s == scope) return;
    }
    throw Error(ErrorCode::kNoConsent, "consent does not cover " + scope + " data");
  }

  Json submit_assessment(const Json& req) {
    std::string team_id = req_string(req, "team");
    std::string member_id = req_string(req, "member");
    open_team(team_id);
    auto [subject, m] = member(team_id, member_id);
    std::string name = req_string(req, "instrument");
    const auto& def = bundle.instrument(name);
    if (def.kind() == InstrumentKind::kImiIe || def.kind() == InstrumentKind::kMwms) {
      return record_motivation(req, team_id, member_id, subject, *m, name, def);
    }
    require_consent(*m, "personality");
    if (!req.contains("responses")) throw Error(ErrorCode::kValidationFailure, "request lacks responses");
    auto responses = validated([&] { return batch::parse_responses(req["responses"]); });
    const Timestamp at = opt_time(req, "at").value_or(now());
    auto profile = validated([&] { return psychometrics::score_bfi(responses, def, at); });
    ZVector z = psychometrics::zscore_profile(profile, psychometrics::TraitNorms::reference());
    auto kind = role_model::classify_archetype(z, cfg().high_threshold);
    auto seq = commit("assessment.recorded",
                      Json{{"subject", subject},
                           {"instrument", name},
                           {"source", std::string(psychometrics::profile_source_name(profile.source))},
                           {"traits", traits_json(profile.traits)},
                           {"z", traits_json(z)},
                           {"archetype", std::string(role_model::archetype_name(kind))},
                           {"assessed_at", at}});
    return Json{{"member", member_id},
                {"profile",
                 {{"traits", trait_map(profile.traits)},
                  {"z", trait_map(z)},
                  {"source", std::string(psychometrics::profile_source_name(profile.source))},
                  {"assessed_at", at},
                  {"archetype", std::string(role_model::archetype_name(kind))},
                  {"ai_specialization",
                   std::string(role_model::specialization_name(role_model::specialization_of(kind)))}}},
                {"seq", seq}};
  }

  Json submit_pulse(const Json& req) {
    std::string team_id = req_string(req, "team");
    std::string member_id = req_string(req, "member");
    open_team(team_id);
    auto [subject, m] = member(team_id, member_id);
    std::string name = opt_string(req, "instrument").value_or("imi_ie");
    const auto& def = bundle.instrument(name);
    if (def.kind() != InstrumentKind::kImiIe && def.kind() != InstrumentKind::kMwms) {
      throw Error(ErrorCode::kValidationFailure, "pulses take a motivation instrument, not " + name);
    }
    return record_motivation(req, team_id, member_id, subject, *m, name, def);
  }

  Json record_motivation(const Json& req, const std::string& team_id, const std::string& member_id,
                         const std::string& subject, const Json& m, const std::string& name,
                         const psychometrics::InstrumentDefinition& def) {
    (void)team_id;
    require_consent(m, "motivation");
    if (!req.contains("responses")) throw Error(ErrorCode::kValidationFailure, "request lacks responses");
    auto responses = validated([&] { return batch::parse_responses(req["responses"]); });
    auto ctx_name = opt_string(req, "role_context").value_or("Solo");
    auto ctx = psychometrics::parse_role_context(ctx_name);
    if (!ctx) throw Error(ErrorCode::kValidationFailure, "unknown role_context '" + ctx_name + "'");
    const Timestamp at = opt_time(req, "at").value_or(now());
    std::string session = opt_string(req, "session").value_or("");

    MotivationSample sample = validated([&] {
      if (def.kind() == InstrumentKind::kImiIe) {
        double raw = psychometrics::score_imi(responses, def);
        return psychometrics::make_sample(member_id, session, *ctx, raw, def, at);
      }
      auto subs = psychometrics::score_mwms(responses, def);
      double raw = psychometrics::mwms_autonomous_composite(subs);
      auto s = psychometrics::make_sample(member_id, session, *ctx, raw, def, at);
      s.subscales = std::move(subs);
      return s;
    });

    auto history = samples_of(m, member_id);
    history.push_back(sample);
    std::optional<monitor::Baseline> baseline = baseline_of(m, member_id);
    Json new_baseline = nullptr;
    try {
      if (!baseline) {
        baseline = monitor::establish_baseline(member_id, history, cfg().monitor, 1);
        new_baseline = baseline_json(*baseline);
      } else if (!baseline->mwms) {
        auto recal = monitor::establish_baseline(member_id, history, cfg().monitor, baseline->version + 1);
        if (recal.mwms) {
          recal.imi = baseline->imi;
          recal.imi_sd = baseline->imi_sd;
          recal.established_from = baseline->established_from;
          recal.established_at = baseline->established_at;
          baseline = recal;
          new_baseline = baseline_json(recal);
        }
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInsufficientSamples) throw;
    }

    Json fired = Json::array();
    if (baseline) {
      std::set<std::string> seen;
      for (const auto& t : m["triggers"]) seen.insert(t["id"].get<std::string>());
      for (const auto& t : monitor::evaluate_triggers(member_id, &*baseline, history, cfg().monitor)) {
        std::string id = subject + ":" + std::string(monitor::trigger_kind_name(t.kind)) + ":" +
                         (t.evidence.empty() ? "" : t.evidence.back().period);
        if (seen.count(id)) continue;
        fired.push_back(Json{{"id", id},
                             {"kind", std::string(monitor::trigger_kind_name(t.kind))},
                             {"fired_at", t.fired_at}});
      }
    }
    Json data{{"subject", subject}, {"sample", sample_json(sample, name)}, {"triggers", fired}};
    if (!new_baseline.is_null()) data["baseline"] = new_baseline;
    auto seq = commit("motivation.recorded", data);
    Json sample_out = sample_json(sample, name);
    sample_out["member"] = member_id;
    Json triggers_out = Json::array();
    for (const auto& f : fired) {
      triggers_out.push_back(Json{{"kind", f["kind"]}, {"fired_at", f["fired_at"]}});
    }
    return Json{{"member", member_id},
                {"sample", sample_out},
                {"baseline_established", !new_baseline.is_null()},
                {"triggers", triggers_out},
                {"seq", seq}};
  }

  Json get_profile(const Json& req) const {
    std::string team_id = req_string(req, "team");
    std::string member_id = req_string(req, "member");
    team(team_id);
    auto [subject, m] = member(team_id, member_id);
    if (revoked(*m)) throw Error(ErrorCode::kConsentRevoked, "member revoked consent; personal fields are withheld");
    auto row = store->directory_by_subject(subject);
    Json out{{"member", member_id},
             {"display_name", row && row->display_name ? Json(*row->display_name) : Json(nullptr)},
             {"consent", (*m)["consent"]},
             {"current_role", (*m)["current_role"]},
             {"samples", (*m)["samples"].size()},
             {"baseline", (*m)["baseline"]},
             {"profile", nullptr}};
    if (!(*m)["profile"].is_null()) {
      const Json& p = (*m)["profile"];
      ZVector z = z_of(*m);
      auto kind = archetype_of(*m);
      auto rec = role_model::score_roles(z, bundle.model());
      out["profile"] = Json{{"traits", trait_map(traits_from(p["traits"]))},
                            {"z", trait_map(z)},
                            {"source", p["source"]},
                            {"instrument", p["instrument"]},
                            {"assessed_at", p["assessed_at"]},
                            {"archetype", (*m)["archetype"]},
                            {"ai_specialization",
                             std::string(role_model::specialization_name(role_model::specialization_of(kind)))},
                            {"recommendation", recommendation_json(rec)},
                            {"reassessment_due",
                             monitor::reassessment_due(p["assessed_at"].get<Timestamp>(), now(), cfg().monitor)}};
    }
    return out;
  }

  Json get_team(const Json& req) const {
    std::string team_id = req_string(req, "team");
    const Json& t = team(team_id);
    Json members = Json::array();
    for (const auto& s : t["members"]) {
      const Json& m = state["members"][s.get<std::string>()];
      auto row = store->directory_by_subject(s.get<std::string>());
      members.push_back(Json{{"member", row ? Json(row->member_id) : Json(nullptr)},
                             {"display_name", row && row->display_name ? Json(*row->display_name) : Json(nullptr)},
                             {"revoked", revoked(m)},
                             {"consent", m["consent"].is_null() ? Json::array() : m["consent"]["scopes"]},
                             {"assessed", !m["profile"].is_null()},
                             {"archetype", m["archetype"]},
                             {"current_role", m["current_role"]},
                             {"has_baseline", !m["baseline"].is_null()}});
    }
    auto names = [this](const Json& subjects) {
      Json out = Json::array();
      for (const auto& s : subjects) out.push_back(name_or_subject(s.get<std::string>()));
      return out;
    };
    auto pair_names = [this](const Json& pairs) {
      Json out = Json::array();
      for (const auto& p : pairs) {
        out.push_back(Json::array({name_or_subject(p[0].get<std::string>()), name_or_subject(p[1].get<std::string>())}));
      }
      return out;
    };
    Json proposal = nullptr;
    if (!t["proposal"].is_null()) {
      proposal = Json{{"version", t["proposal"]["version"]},
                      {"pairs", pair_names(t["proposal"]["pairs"])},
                      {"unpaired", names(t["proposal"]["unpaired"])},
                      {"total_score", t["proposal"]["total_score"]}};
    }
    Json committed = nullptr;
    if (!t["committed"].is_null()) {
      Json roles = Json::object();
      for (const auto& [s, r] : t["committed"]["roles"].items()) roles[name_or_subject(s)] = r;
      committed = Json{{"proposal_version", t["committed"]["proposal_version"]},
                       {"pairs", pair_names(t["committed"]["pairs"])},
                       {"unpaired", names(t["committed"]["unpaired"])},
                       {"roles", roles},
                       {"actor", t["committed"]["actor"]},
                       {"at", t["committed"]["at"]}};
    }
    return Json{{"team", team_id},
                {"members", members},
                {"sprint", t["sprint"]},
                {"closed", t["closed"]},
                {"proposal", proposal},
                {"committed", committed}};
  }

  Json recommend(const Json& req) {
    std::string team_id = req_string(req, "team");
    const Json& t = open_team(team_id);
    auto members = assessed_members(t, team_id);
    if (members.empty()) {
      throw Error(ErrorCode::kIncompleteAssessments, "team " + team_id + " has no active members");
    }
    std::vector<batch::BundleMember> inputs;
    for (const auto& a : members) inputs.push_back({a.member_id, a.member.z});
    auto composed = batch::compose(team_id, inputs, bundle);
    Json& bundle_json = composed.bundle;
    const auto& assignment = composed.assignment;
    std::string digest = crypto::to_hex(crypto::sha256(ledger::canonical(bundle_json)));
    int version = t["proposal_count"].get<int>() + 1;
    if (!t["proposal"].is_null() && t["proposal"]["digest"] == digest) {
      version = t["proposal"]["version"].get<int>();
    }
    std::map<std::string, std::string> subject_by_id;
    for (const auto& a : members) subject_by_id[a.member_id] = a.subject;
    std::vector<std::pair<std::string, std::string>> subj_pairs;
    for (const auto& [x, y] : assignment.pairs) subj_pairs.emplace_back(subject_by_id[x], subject_by_id[y]);
    Json unpaired = Json::array();
    for (const auto& u : assignment.unpaired) unpaired.push_back(subject_by_id[u]);
    auto seq = commit("recommendation.issued", Json{{"team", team_id},
                                                    {"version", version},
                                                    {"digest", digest},
                                                    {"pairs", pairs_json(subj_pairs)},
                                                    {"unpaired", unpaired},
                                                    {"total_score", assignment.total_score}});
    bundle_json["proposal_version"] = version;
    return Json{{"bundle", bundle_json}, {"seq", seq}};
  }

  Json accept_or_adjust(const Json& req) {
    std::string team_id = req_string(req, "team");
    const Json& t = open_team(team_id);
    if (t["proposal"].is_null()) throw Error(ErrorCode::kStaleProposal, "no recommendation has been issued");
    if (!req.contains("proposal_version") || !req["proposal_version"].is_number_integer()) {
      bad_request("request needs an integer 'proposal_version'");
    }
    const int version = req["proposal_version"].get<int>();
    if (version != t["proposal"]["version"].get<int>()) {
      throw Error(ErrorCode::kStaleProposal, "proposal " + std::to_string(version) +
                                                 " was superseded by " + t["proposal"]["version"].dump());
    }
    std::string actor = req_string(req, "actor");
    auto members = assessed_members(t, team_id);
    std::map<std::string, const Assessed*> by_id;
    for (const auto& a : members) by_id[a.member_id] = &a;

    // Without explicit pairs the proposal is accepted as is.
    std::vector<std::pair<std::string, std::string>> pairs;
    if (req.contains("pairs") && !req["pairs"].is_null()) {
      if (!req["pairs"].is_array()) bad_request("'pairs' must be an array of member pairs");
      for (const auto& p : req["pairs"]) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string()) {
          bad_request("each pair must be two member ids");
        }
        pairs.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
      }
    } else {
      for (const auto& p : t["proposal"]["pairs"]) {
        pairs.emplace_back(member_id_of(p[0].get<std::string>()), member_id_of(p[1].get<std::string>()));
      }
    }
    std::set<std::string> used;
    for (const auto& [a, b] : pairs) {
      for (const auto& id : {a, b}) {
        if (!by_id.count(id)) throw Error(ErrorCode::kValidationFailure, "'" + id + "' is not an active assessed member");
        if (!used.insert(id).second) throw Error(ErrorCode::kValidationFailure, "'" + id + "' appears in two pairs");
      }
      auto ps = pairing::pair_score(by_id[a]->member, by_id[b]->member, cfg().pairing);
      if (ps.forbidden()) throw Error(ErrorCode::kForbiddenPairIntroduced, pairing::explain_pair(ps));
    }

    // Roles: explicit overrides first, then the better Pilot/Navigator split.
    std::map<std::string, Role> roles;
    for (const auto& [a, b] : pairs) {
      const auto& ra = by_id[a]->recommendation;
      const auto& rb = by_id[b]->recommendation;
      bool a_pilots = ra.score(Role::kPilot) + rb.score(Role::kNavigator) >=
                      rb.score(Role::kPilot) + ra.score(Role::kNavigator);
      roles[a] = a_pilots ? Role::kPilot : Role::kNavigator;
      roles[b] = a_pilots ? Role::kNavigator : Role::kPilot;
    }
    std::vector<std::string> unpaired;
    for (const auto& a : members) {
      if (!used.count(a.member_id)) {
        unpaired.push_back(a.member_id);
        roles[a.member_id] = Role::kSolo;
      }
    }
    if (req.contains("roles") && !req["roles"].is_null()) {
      if (!req["roles"].is_object()) bad_request("'roles' must map member ids to roles");
      for (const auto& [id, r] : req["roles"].items()) {
        if (!by_id.count(id)) throw Error(ErrorCode::kValidationFailure, "'" + id + "' is not an active assessed member");
        auto role = r.is_string() ? role_model::parse_role(r.get<std::string>()) : std::nullopt;
        if (!role) throw Error(ErrorCode::kValidationFailure, "unknown role " + r.dump());
        roles[id] = *role;
      }
    }

    std::set<std::pair<std::string, std::string>> proposed, chosen;
    auto norm = [](std::string a, std::string b) { return a < b ? std::pair{a, b} : std::pair{b, a}; };
    for (const auto& p : t["proposal"]["pairs"]) {
      proposed.insert(norm(member_id_of(p[0].get<std::string>()), member_id_of(p[1].get<std::string>())));
    }
    for (const auto& [a, b] : pairs) chosen.insert(norm(a, b));
    auto subj = [&](const std::string& id) { return by_id[id]->subject; };
    Json added = Json::array(), removed = Json::array();
    for (const auto& p : chosen) {
      if (!proposed.count(p)) added.push_back(Json::array({subj(p.first), subj(p.second)}));
    }
    for (const auto& p : proposed) {
      if (!chosen.count(p)) removed.push_back(Json::array({subj(p.first), subj(p.second)}));
    }
    std::vector<std::pair<std::string, std::string>> subj_pairs;
    for (const auto& [a, b] : pairs) subj_pairs.emplace_back(subj(a), subj(b));
    Json subj_unpaired = Json::array();
    for (const auto& u : unpaired) subj_unpaired.push_back(subj(u));
    Json subj_roles = Json::object();
    Json id_roles = Json::object();
    for (const auto& [id, r] : roles) {
      subj_roles[subj(id)] = std::string(role_model::role_name(r));
      id_roles[id] = std::string(role_model::role_name(r));
    }
    Json sprint = t["sprint"].is_null() ? Json(nullptr) : t["sprint"]["id"];
    auto seq = commit("assignment.committed",
                      Json{{"team", team_id},
                           {"proposal_version", version},
                           {"actor", actor},
                           {"pairs", pairs_json(subj_pairs)},
                           {"unpaired", subj_unpaired},
                           {"roles", subj_roles},
                           {"override", {{"added", added}, {"removed", removed}}},
                           {"sprint", sprint}});
    return Json{{"team", team_id},
                {"proposal_version", version},
                {"pairs", pairs_json(pairs)},
                {"unpaired", unpaired},
                {"roles", id_roles},
                {"overridden", !added.empty() || !removed.empty()},
                {"seq", seq}};
  }

  std::vector<standards::MemberMotivation> motivations(const Json& t) const {
    std::vector<standards::MemberMotivation> out;
    for (const auto& subject : active_subjects(t)) {
      const Json& m = state["members"][subject];
      std::string id = member_id_of(subject);
      standards::MemberMotivation mm{id, baseline_of(m, id), samples_of(m, id), {}};
      mm.triggers = triggers_for(m, id);
      out.push_back(std::move(mm));
    }
    return out;
  }

  std::vector<pairing::PairScore> committed_pairs(const Json& t, const std::vector<Assessed>& members) const {
    std::vector<pairing::PairScore> out;
    if (t["committed"].is_null()) return out;
    std::map<std::string, const Assessed*> by_subject;
    for (const auto& a : members) by_subject[a.subject] = &a;
    for (const auto& p : t["committed"]["pairs"]) {
      auto a = by_subject.find(p[0].get<std::string>());
      auto b = by_subject.find(p[1].get<std::string>());
      if (a == by_subject.end() || b == by_subject.end()) continue;
      out.push_back(pairing::pair_score(a->second->member, b->second->member, cfg().pairing));
    }
    return out;
  }

  std::vector<standards::IsoArtifact> build_report(const std::string& team_id, const Json& t,
                                                   standards::ArtifactKind kind, const Json& req) const {
    using standards::ArtifactKind;
    const Timestamp at = now();
    switch (kind) {
      case ArtifactKind::kTeamCompositionMatrix: {
        std::vector<standards::MatrixMember> rows;
        for (const auto& subject : active_subjects(t)) {
          const Json& m = state["members"][subject];
          standards::MatrixMember row{member_id_of(subject), {}, {}, {}, {}};
          if (!m["profile"].is_null()) {
            row.profile = psychometrics::PersonalityProfile{traits_from(m["profile"]["traits"]),
                                                            psychometrics::ProfileSource::kManual,
                                                            m["profile"]["assessed_at"].get<Timestamp>()};
            row.archetype = archetype_of(m);
            row.recommendation = role_model::score_roles(z_of(m), bundle.model());
          }
          if (!m["current_role"].is_null()) row.current_role = role_model::parse_role(m["current_role"].get<std::string>());
          rows.push_back(std::move(row));
        }
        return {standards::team_composition_matrix(team_id, rows, at)};
      }
      case ArtifactKind::kPairingBacklogItem: {
        if (t["committed"].is_null()) throw Error(ErrorCode::kNotFound, "team has no committed assignment");
        auto members = assessed_members(t, team_id);
        std::vector<standards::PlanMember> plan;
        for (const auto& a : members) {
          plan.push_back({a.member_id, a.recommendation.chosen,
                          role_model::rotation_schedule(bundle.model().rotation(*a.member.archetype),
                                                        cfg().rotation_horizon)});
        }
        std::string sprint = opt_string(req, "sprint").value_or(
            t["sprint"].is_null() ? std::string("unplanned") : t["sprint"]["id"].get<std::string>());
        return standards::pairing_backlog_items(committed_pairs(t, members), plan, sprint, at);
      }
      case ArtifactKind::kSprintMotivationTrend: {
        bool anonymized = opt_bool(req, "anonymized", false);
        auto active = active_subjects(t);
        if (anonymized && active.size() < cfg().anonymity_k) {
          throw Error(ErrorCode::kAnonymityThreshold,
                      "anonymized view needs at least " + std::to_string(cfg().anonymity_k) +
                          " members, team has " + std::to_string(active.size()));
        }
        standards::ReportPeriod period = report_period(t, req, at);
        auto mm = motivations(t);
        return {standards::motivation_report(team_id, mm, period, anonymized, cfg().monitor, at)};
      }
      case ArtifactKind::kMotivationBaselineReport: {
        auto mm = motivations(t);
        return {standards::baseline_report(team_id, mm, cfg().monitor, at)};
      }
      case ArtifactKind::kAssessmentPolicyRecord: {
        standards::PolicyInputs in;
        in.team_id = team_id;
        in.policy_version = cfg().policy_version;
        for (const auto& name : bundle.instrument_names()) {
          const auto& def = bundle.instrument(name);
          in.instruments.push_back(def.name() + " " + def.version() + " (" + name + ", scale " +
                                   std::to_string(def.scale_min()) + "-" + std::to_string(def.scale_max()) + ")");
        }
        in.consent_scopes = {"personality", "motivation"};
        in.hash = cfg().hash;
        in.anonymity_k = cfg().anonymity_k;
        in.reassessment_days = cfg().monitor.reassessment_interval_days;
        in.founding_samples = cfg().monitor.founding_samples;
        in.delta_sd_factor = cfg().monitor.delta_sd_factor;
        in.fixed_delta = cfg().monitor.fixed_delta;
        in.high_threshold = cfg().high_threshold;
        return {standards::assessment_policy_record(in, at)};
      }
      case ArtifactKind::kRetrospectiveGuide: {
        standards::ReportPeriod period = report_period(t, req, at);
        auto in_period = [&](Timestamp x) { return x >= period.from && x < period.to; };
        standards::RetrospectiveInputs in;
        in.team_id = team_id;
        in.sprint_id = opt_string(req, "sprint").value_or(
            t["sprint"].is_null() ? std::string("unplanned") : t["sprint"]["id"].get<std::string>());
        auto mm = motivations(t);
        std::map<std::string, std::vector<double>> weekly;
        for (const auto& m : mm) {
          std::vector<MotivationSample> window;
          for (const auto& s : m.samples) {
            if (in_period(s.taken_at)) window.push_back(s);
          }
          for (const auto& w : monitor::weekly_series(window, cfg().monitor)) weekly[w.period].push_back(w.value);
          for (const auto& tr : m.triggers) {
            if (in_period(tr.fired_at)) in.triggers.push_back(tr);
          }
        }
        for (const auto& [week, values] : weekly) {
          if (values.size() < cfg().anonymity_k) continue;
          double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
          in.team_trend.push_back(monitor::PeriodAggregate{week, mean, values.size(), 0});
        }
        for (const auto& s : t["signals"]) {
          auto kind_parsed = monitor::parse_trigger_kind(s["kind"].get<std::string>());
          Timestamp sat = s["signal_at"].get<Timestamp>();
          if (kind_parsed && in_period(sat)) {
            in.triggers.push_back(monitor::external_signal("team", *kind_parsed, s["note"].get<std::string>(), sat));
          }
        }
        std::vector<Assessed> members;
        try {
          members = assessed_members(t, team_id);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kIncompleteAssessments) throw;
        }
        in.pairs = committed_pairs(t, members);
        return {standards::retrospective_guide(in, at)};
      }
      case ArtifactKind::kPersonalityOptimizationSummary:
        return {standards::closure_summary(project_history(team_id, t), at)};
    }
    throw Error(ErrorCode::kUnknownAnchor, "unsupported artifact kind");
  }

  standards::ReportPeriod report_period(const Json& t, const Json& req, Timestamp at) const {
    standards::ReportPeriod p;
    Timestamp default_from = t["sprint"].is_null() ? t["created_at"].get<Timestamp>()
                                                   : t["sprint"]["started_at"].get<Timestamp>();
    p.from = opt_time(req, "from").value_or(default_from);
    p.to = opt_time(req, "to").value_or(at + 1);
    if (p.to <= p.from) bad_request("'to' must be after 'from'");
    p.label = opt_string(req, "label").value_or(
        t["sprint"].is_null() ? std::string("project to date") : "sprint " + t["sprint"]["id"].get<std::string>());
    return p;
  }

  standards::ProjectHistory project_history(const std::string& team_id, const Json& t) const {
    standards::ProjectHistory h;
    h.team_id = team_id;
    h.closed = t["closed"].get<bool>();
    const Timestamp end = t["closed_at"].is_null() ? now() + 1 : t["closed_at"].get<Timestamp>();
    const Json& assignments = t["assignments"];

    std::map<std::pair<std::string, std::string>, standards::PairHistory> pairs;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
      const Json& a = assignments[i];
      const Timestamp from = a["at"].get<Timestamp>();
      const Timestamp to = i + 1 < assignments.size() ? assignments[i + 1]["at"].get<Timestamp>() : end;
      for (const auto& p : a["pairs"]) {
        std::string sa = p[0].get<std::string>(), sb = p[1].get<std::string>();
        const Json& ma = state["members"][sa];
        const Json& mb = state["members"][sb];
        if (revoked(ma) || revoked(mb)) continue;
        std::string ida = member_id_of(sa), idb = member_id_of(sb);
        if (idb < ida) {
          std::swap(ida, idb);
          std::swap(sa, sb);
        }
        auto& ph = pairs[{ida, idb}];
        ph.member_a = ida;
        ph.member_b = idb;
        std::string sprint = a["sprint"].is_null() ? std::string("unplanned") : a["sprint"].get<std::string>();
        if (std::find(ph.sprints.begin(), ph.sprints.end(), sprint) == ph.sprints.end()) ph.sprints.push_back(sprint);
        const Json& ba = state["members"][sa]["baseline"];
        const Json& bb = state["members"][sb]["baseline"];
        if (ba.is_null() || bb.is_null()) continue;
        ph.baseline = (ba["imi"].get<double>() + bb["imi"].get<double>()) / 2.0;
        for (const auto* m : {&state["members"][sa], &state["members"][sb]}) {
          for (const auto& s : (*m)["samples"]) {
            Timestamp ts = s["taken_at"].get<Timestamp>();
            if (s["instrument"] == "IMI_IE" && ts >= from && ts < to) {
              ph.motivation.push_back(s["normalized"].get<double>());
            }
          }
        }
      }
    }
    for (auto& [_, ph] : pairs) h.pairs.push_back(std::move(ph));

    for (const auto& subject : active_subjects(t)) {
      const Json& m = state["members"][subject];
      std::array<int, role_model::kRoleCount> counts{};
      for (const auto& s : m["samples"]) {
        if (auto r = role_model::parse_role(s["role_context"].get<std::string>())) ++counts[role_model::index(*r)];
      }
      h.role_counts[member_id_of(subject)] = counts;
      for (const auto& tr : m["triggers"]) ++h.triggers_by_kind[tr["kind"].get<std::string>()];
    }
    for (const auto& s : t["signals"]) ++h.triggers_by_kind[s["kind"].get<std::string>()];
    return h;
  }

  Json report(const Json& req) {
    std::string team_id = req_string(req, "team");
    const Json& t = team(team_id);
    std::string kind_name = req_string(req, "kind");
    auto kind = standards::parse_artifact_kind(kind_name);
    if (!kind) throw Error(ErrorCode::kUnknownAnchor, "unknown artifact kind '" + kind_name + "'");
    auto artifacts = build_report(team_id, t, *kind, req);
    std::string machine;
    Json out = Json::array();
    for (const auto& a : artifacts) {
      machine += a.machine();
      out.push_back(Json{{"artifact", a.to_json()}, {"markdown", a.markdown()}, {"file_stem", a.file_stem()}});
    }
    const auto& anchor = standards::anchor_for(*kind);
    auto seq = commit("artifact.generated", Json{{"team", team_id},
                                                 {"kind", kind_name},
                                                 {"anchor", anchor.code},
                                                 {"count", artifacts.size()},
                                                 {"digest", crypto::to_hex(crypto::sha256(machine))}});
    return Json{{"team", team_id}, {"kind", kind_name}, {"artifacts", out}, {"seq", seq}};
  }

  Json signal(const Json& req) {
    std::string team_id = req_string(req, "team");
    open_team(team_id);
    std::string kind_name = req_string(req, "kind");
    auto kind = monitor::parse_trigger_kind(kind_name);
    if (!kind || (*kind != monitor::TriggerKind::kVelocityDecline && *kind != monitor::TriggerKind::kPhaseTransition)) {
      bad_request("signal kind must be VelocityDecline or PhaseTransition");
    }
    Json subject = nullptr;
    if (auto member_id = opt_string(req, "member")) subject = member(team_id, *member_id).first;
    const Timestamp sat = opt_time(req, "signal_at").value_or(now());
    auto seq = commit("signal.recorded", Json{{"team", team_id},
                                              {"kind", kind_name},
                                              {"subject", subject},
                                              {"note", opt_string(req, "note").value_or("")},
                                              {"signal_at", sat}});
    return Json{{"team", team_id}, {"kind", kind_name}, {"seq", seq}};
  }

  Json list_triggers(const Json& req) const {
    std::string team_id = req_string(req, "team");
    const Json& t = team(team_id);
    std::vector<Assessed> members;
    try {
      members = assessed_members(t, team_id);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kIncompleteAssessments) throw;
    }
    std::map<std::string, const Assessed*> by_id;
    for (const auto& a : members) by_id[a.member_id] = &a;
    auto pairs = committed_pairs(t, members);

    auto context_for = [&](const std::string& id, const Json& m) {
      monitor::InterventionContext ctx;
      ctx.member_id = id;
      if (by_id.count(id)) {
        ctx.recommendation = by_id[id]->recommendation;
        ctx.current_role = ctx.recommendation.chosen;
      }
      if (!m["current_role"].is_null()) ctx.current_role = *role_model::parse_role(m["current_role"].get<std::string>());
      for (const auto& p : pairs) {
        if (p.member_a == id || p.member_b == id) ctx.current_pair = p;
      }
      return ctx;
    };

    Json out = Json::array();
    for (const auto& subject : active_subjects(t)) {
      const Json& m = state["members"][subject];
      std::string id = member_id_of(subject);
      auto ctx = context_for(id, m);
      for (const auto& tr : triggers_for(m, id)) {
        Json interventions = Json::array();
        if (by_id.count(id)) {
          for (const auto& i : monitor::propose_interventions(tr, ctx)) interventions.push_back(intervention_json(i));
        }
        out.push_back(Json{{"trigger", trigger_json(tr)}, {"interventions", interventions}});
      }
    }
    for (const auto& s : t["signals"]) {
      std::string who = s["subject"].is_null() ? team_id : member_id_of(s["subject"].get<std::string>());
      auto tr = monitor::external_signal(who, *monitor::parse_trigger_kind(s["kind"].get<std::string>()),
                                         s["note"].get<std::string>(), s["signal_at"].get<Timestamp>());
      Json interventions = Json::array();
      if (!s["subject"].is_null() && by_id.count(who)) {
        auto ctx = context_for(who, state["members"][s["subject"].get<std::string>()]);
        for (const auto& i : monitor::propose_interventions(tr, ctx)) interventions.push_back(intervention_json(i));
      }
      out.push_back(Json{{"trigger", trigger_json(tr)}, {"interventions", interventions}});
    }
    return Json{{"team", team_id}, {"triggers", out}};
  }

  Json set_sprint(const Json& req) {
    std::string team_id = req_string(req, "team");
    const Json& t = open_team(team_id);
    std::string sprint = req_string(req, "sprint");
    int index = t["sprint"].is_null() ? 1 : t["sprint"]["index"].get<int>() + 1;
    auto seq = commit("sprint.started", Json{{"team", team_id}, {"sprint", sprint}, {"index", index}});
    return Json{{"team", team_id}, {"sprint", sprint}, {"index", index}, {"seq", seq}};
  }

  Json close_project(const Json& req) {
    std::string team_id = req_string(req, "team");
    open_team(team_id);
    auto seq = commit("project.closed", Json{{"team", team_id}});
    return Json{{"team", team_id}, {"closed", true}, {"seq", seq}};
  }

  std::string replay() const {
    Json s = empty_state();
    for (const auto& e : ledger->entries()) apply_event(s, e.kind, e.data());
    return ledger::canonical(s);
  }

  Json verify(const Json&) const {
    auto v = ledger::verify_file(ledger->path());
    Json result{{"ok", v.ok},
                {"entries", v.entries},
                {"head", crypto::to_hex(v.head)},
                {"first_bad_seq", v.first_bad_seq ? Json(*v.first_bad_seq) : Json(nullptr)},
                {"reason", v.reason}};
    std::string current = ledger::canonical(state);
    return Json{{"ledger", result},
                {"hash", cfg().hash},
                {"applied_seq", applied},
                {"state_matches_replay", v.ok && replay() == current}};
  }

  Json export_memos(const Json& req) const {
    std::uint64_t from = req.value("from", std::uint64_t{1});
    std::optional<std::uint64_t> to;
    if (req.contains("to") && !req["to"].is_null()) to = req["to"].get<std::uint64_t>();
    auto x = ledger::export_memos(ledger->path(), from, to);
    return Json{{"seq_from", x.seq_from},
                {"seq_to", x.seq_to},
                {"entries", x.entries.size()},
                {"export", x.to_jsonl()}};
  }
};

Service::Service(std::filesystem::path data_dir, ConfigBundle bundle, ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(data_dir), std::move(bundle), std::move(options))) {
  Impl& s = *impl_;
  std::error_code ec;
  std::filesystem::create_directories(s.data_dir, ec);
  if (ec) throw Error(ErrorCode::kStorageFailure, "cannot create " + s.data_dir.string());
  s.store = std::make_unique<Store>(s.data_dir / "store.db");
  s.ledger = std::make_unique<ledger::Ledger>(s.data_dir / "ledger.bin");
  s.salt = s.secret(s.cfg().salt, "secret.salt");
  s.token_secret = s.secret(s.cfg().token_secret, "secret.token");

  auto stored = s.store->get("state");
  s.state = stored ? Json::parse(*stored) : empty_state();
  s.applied = s.store->applied_seq();
  if (s.applied > s.ledger->size()) {
    throw Error(ErrorCode::kStorageFailure, "store is at seq " + std::to_string(s.applied) +
                                                " but the ledger ends at " + std::to_string(s.ledger->size()));
  }
  if (s.applied < s.ledger->size()) {
    for (const auto& e : s.ledger->entries(s.applied + 1)) {
      apply_event(s.state, e.kind, e.data());
      s.applied = e.seq;
      ++s.replayed;
    }
    s.store->put_state(ledger::canonical(s.state), s.applied);
  }
}

Service::~Service() = default;

const std::vector<std::string>& Service::operations() { return kOperations; }

bool Service::is_mutating(std::string_view op) { return !kReadOnly.count(op); }

Json Service::call(std::string_view op, const Json& request) {
  Impl& s = *impl_;
  if (!request.is_object()) bad_request("request must be a JSON object");
  if (!is_mutating(op)) {
    std::shared_lock lock(s.state_mu);
    if (op == "get_profile") return s.get_profile(request);
    if (op == "get_team") return s.get_team(request);
    if (op == "list_triggers") return s.list_triggers(request);
    if (op == "verify") return s.verify(request);
    if (op == "export_memos") return s.export_memos(request);
  }
  std::lock_guard lock(s.write_mu);
  if (op == "create_team") return s.create_team(request);
  if (op == "register_member") return s.register_member(request);
  if (op == "grant_consent") return s.grant_consent(request);
  if (op == "revoke_consent") return s.revoke_consent(request);
  if (op == "submit_assessment") return s.submit_assessment(request);
  if (op == "submit_pulse") return s.submit_pulse(request);
  if (op == "recommend") return s.recommend(request);
  if (op == "accept_or_adjust") return s.accept_or_adjust(request);
  if (op == "report") return s.report(request);
  if (op == "signal") return s.signal(request);
  if (op == "set_sprint") return s.set_sprint(request);
  if (op == "close_project") return s.close_project(request);
  throw Error(ErrorCode::kNotFound, "unknown operation '" + std::string(op) + "'");
}

bool Service::authorize(Scope scope, std::string_view team_id, std::string_view member_id,
                        std::string_view token) const {
  const Impl& s = *impl_;
  if (scope == Scope::kAdmin && !s.cfg().admin_token) return true;
  if (token.empty()) return false;
  auto equal = [](std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    unsigned char diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff |= static_cast<unsigned char>(a[i] ^ b[i]);
    return diff == 0;
  };
  if (scope == Scope::kAdmin) {
    return equal(*s.cfg().admin_token, token);
  }
  std::shared_lock lock(s.state_mu);
  auto it = s.state["teams"].find(std::string(team_id));
  if (it == s.state["teams"].end()) return false;
  if (equal((*it)["lead_token_digest"].get<std::string>(), crypto::to_hex(crypto::sha256(token)))) return true;
  if (scope != Scope::kMember || member_id.empty()) return false;
  return equal(s.pulse_token(std::string(member_id)), token);
}

std::string Service::state_snapshot() const {
  std::shared_lock lock(impl_->state_mu);
  return ledger::canonical(impl_->state);
}

std::string Service::replay_snapshot() const {
  std::shared_lock lock(impl_->state_mu);
  return impl_->replay();
}

std::uint64_t Service::applied_seq() const {
  std::shared_lock lock(impl_->state_mu);
  return impl_->applied;
}

std::uint64_t Service::replayed_on_open() const noexcept { return impl_->replayed; }

const ledger::Ledger& Service::ledger() const noexcept { return *impl_->ledger; }

const ConfigBundle& Service::bundle() const noexcept { return impl_->bundle; }

}  // namespace roma::service
