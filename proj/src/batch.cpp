#include "roma/batch.hpp"

#include <map>
#include <set>

#include "roma/clustering.hpp"
#include "roma/error.hpp"

namespace roma::batch {
namespace {

using psychometrics::InstrumentKind;

std::string name_of(role_model::Role r) { return std::string(role_model::role_name(r)); }

Json flags_json(const pairing::PairScore& p) {
  Json f = Json::array();
  if (p.has(pairing::PairFlag::kSynergy)) f.push_back("synergy");
  if (p.has(pairing::PairFlag::kCaution)) f.push_back("caution");
  if (p.has(pairing::PairFlag::kForbidden)) f.push_back("forbidden");
  return f;
}

Json score_one(const service::ConfigBundle& bundle, const Json& req) {
  if (!req.is_object()) throw Error(ErrorCode::kValidationFailure, "each record must be an object");
  if (!req.contains("instrument") || !req["instrument"].is_string()) {
    throw Error(ErrorCode::kValidationFailure, "record lacks an instrument name");
  }
  if (!req.contains("responses")) throw Error(ErrorCode::kValidationFailure, "record lacks responses");
  std::string name = req["instrument"].get<std::string>();
  const auto& def = bundle.instrument(name);
  auto responses = parse_responses(req["responses"]);
  Timestamp at = req.value("at", Timestamp{0});
  std::string member = req.value("member", std::string());
  Json out{{"instrument", name}, {"member", member}};

  switch (def.kind()) {
    case InstrumentKind::kBfi10:
    case InstrumentKind::kBfi44: {
      auto p = psychometrics::score_bfi(responses, def, at);
      ZVector z = psychometrics::zscore_profile(p, psychometrics::TraitNorms::reference());
      auto kind = role_model::classify_archetype(z, bundle.config().high_threshold);
      out["kind"] = "profile";
      out["source"] = std::string(psychometrics::profile_source_name(p.source));
      out["traits"] = trait_object(p.traits);
      out["z"] = trait_object(z);
      out["archetype"] = std::string(role_model::archetype_name(kind));
      out["ai_specialization"] =
          std::string(role_model::specialization_name(role_model::specialization_of(kind)));
      out["assessed_at"] = at;
      return out;
    }
    case InstrumentKind::kImiIe:
    case InstrumentKind::kMwms: {
      std::string ctx_name = req.value("role_context", std::string("Solo"));
      auto ctx = psychometrics::parse_role_context(ctx_name);
      if (!ctx) throw Error(ErrorCode::kValidationFailure, "unknown role_context '" + ctx_name + "'");
      psychometrics::SubscaleScores subs;
      double raw = 0.0;
      if (def.kind() == InstrumentKind::kImiIe) {
        raw = psychometrics::score_imi(responses, def);
      } else {
        subs = psychometrics::score_mwms(responses, def);
        raw = psychometrics::mwms_autonomous_composite(subs);
      }
      auto s = psychometrics::make_sample(member, req.value("session", std::string()), *ctx, raw, def, at);
      out["kind"] = "motivation_sample";
      out["role_context"] = std::string(psychometrics::role_context_name(s.role_context));
      out["raw"] = s.raw_score;
      out["normalized"] = s.normalized;
      out["taken_at"] = s.taken_at;
      Json sub = Json::array();
      for (const auto& [k, v] : subs) sub.push_back(Json{{"subscale", k}, {"score", v}});
      out["subscales"] = sub;
      return out;
    }
  }
  throw Error(ErrorCode::kUnknownInstrument, "unsupported instrument kind");
}

std::vector<BundleMember> read_members(const Json& req) {
  const Json* list = &req;
  if (req.is_object()) {
    if (!req.contains("members")) throw Error(ErrorCode::kValidationFailure, "input lacks 'members'");
    list = &req["members"];
  }
  if (!list->is_array()) throw Error(ErrorCode::kValidationFailure, "'members' must be an array");
  std::vector<BundleMember> out;
  std::set<std::string> seen;
  for (const auto& m : *list) {
    if (!m.is_object() || !m.contains("member") || !m["member"].is_string()) {
      throw Error(ErrorCode::kValidationFailure, "each member needs a 'member' id");
    }
    BundleMember bm{m["member"].get<std::string>(), {}};
    if (!seen.insert(bm.member).second) {
      throw Error(ErrorCode::kValidationFailure, "member '" + bm.member + "' listed twice");
    }
    if (m.contains("z")) {
      bm.z = trait_vector(m["z"]);
    } else if (m.contains("traits")) {
      auto p = psychometrics::PersonalityProfile::manual(trait_vector(m["traits"]));
      bm.z = psychometrics::zscore_profile(p, psychometrics::TraitNorms::reference());
    } else {
      throw Error(ErrorCode::kIncompleteAssessments, "member " + bm.member + " has neither traits nor z");
    }
    out.push_back(std::move(bm));
  }
  return out;
}

}  // namespace

std::vector<psychometrics::ItemResponse> parse_responses(const Json& j) {
  std::vector<psychometrics::ItemResponse> out;
  auto value_of = [](const Json& v) {
    if (!v.is_number_integer()) throw Error(ErrorCode::kValidationFailure, "responses must be integers");
    return v.get<int>();
  };
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      int id = 0;
      try {
        std::size_t used = 0;
        id = std::stoi(k, &used);
        if (used != k.size()) throw std::invalid_argument(k);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kValidationFailure, "item id '" + k + "' is not a number");
      }
      out.push_back({id, value_of(v)});
    }
  } else if (j.is_array()) {
    int next = 1;
    for (const auto& e : j) {
      if (e.is_object()) {
        if (!e.contains("item") || !e.contains("value")) {
          throw Error(ErrorCode::kValidationFailure, "response objects need item and value");
        }
        out.push_back({value_of(e["item"]), value_of(e["value"])});
      } else {
        out.push_back({next, value_of(e)});
      }
      ++next;
    }
  } else {
    throw Error(ErrorCode::kValidationFailure, "responses must be an object or an array");
  }
  return out;
}

TraitVector trait_vector(const Json& j) {
  TraitVector t{};
  if (j.is_array() && j.size() == kTraitCount) {
    for (std::size_t i = 0; i < kTraitCount; ++i) {
      if (!j[i].is_number()) throw Error(ErrorCode::kValidationFailure, "trait values must be numbers");
      t[i] = j[i].get<double>();
    }
    return t;
  }
  if (!j.is_object()) throw Error(ErrorCode::kValidationFailure, "traits must be an object or 5 numbers");
  for (auto tr : kAllTraits) {
    std::string key(trait_letter(tr));
    if (!j.contains(key) || !j[key].is_number()) {
      throw Error(ErrorCode::kValidationFailure, "trait '" + key + "' missing or not a number");
    }
    t[index(tr)] = j[key].get<double>();
  }
  return t;
}

Json trait_object(const TraitVector& t) {
  Json j = Json::object();
  for (auto tr : kAllTraits) j[std::string(trait_letter(tr))] = t[index(tr)];
  return j;
}

Json score(const service::ConfigBundle& bundle, const Json& request) {
  if (request.is_array()) {
    Json out = Json::array();
    for (const auto& r : request) out.push_back(score_one(bundle, r));
    return out;
  }
  return score_one(bundle, request);
}

Json cluster(std::string_view cohort_text, std::size_t k_min, std::size_t k_max,
             std::optional<std::size_t> k) {
  auto cohort = clustering::parse_cohort(cohort_text);
  auto h = clustering::build_hierarchy(cohort.traits);
  auto model = k ? clustering::cut_and_score(h, *k) : clustering::select_k(h, k_min, k_max);
  Json clusters = Json::array();
  for (std::size_t c = 0; c < model.k; ++c) {
    Json members = Json::array();
    for (std::size_t i = 0; i < model.assignment.size(); ++i) {
      if (model.assignment[i] == c) members.push_back(cohort.member_ids[i]);
    }
    clusters.push_back(Json{{"id", c},
                            {"size", model.sizes[c]},
                            {"centroid", trait_object(model.centroids[c])},
                            {"sd", trait_object(model.sds[c])},
                            {"archetype", std::string(role_model::archetype_name(model.labels[c]))},
                            {"members", members}});
  }
  Json assignment = Json::object();
  for (std::size_t i = 0; i < model.assignment.size(); ++i) {
    assignment[cohort.member_ids[i]] = model.assignment[i];
  }
  return Json{{"k", model.k},
              {"dunn_index", model.dunn_index},
              {"degenerate_dunn", model.degenerate_dunn},
              {"profiles", cohort.traits.size()},
              {"clusters", clusters},
              {"assignment", assignment}};
}

Composed compose(std::string_view team_id, std::span<const BundleMember> members,
                 const service::ConfigBundle& bundle) {
  const auto& cfg = bundle.config();
  const auto& model = bundle.model();
  Composed out;
  Json rows = Json::array();
  std::vector<pairing::TeamMember> tms;
  for (const auto& m : members) {
    auto kind = role_model::classify_archetype(m.z, cfg.high_threshold);
    auto rec = role_model::score_roles(m.z, model);
    auto ai = role_model::recommend_ai_mode(m.z, kind, model, cfg.high_threshold);
    const auto& policy = model.rotation(kind);
    Json fractions = Json::object();
    for (auto r : role_model::kAllRoles) fractions[name_of(r)] = policy.fractions[role_model::index(r)];
    Json schedule = Json::array();
    for (auto r : role_model::rotation_schedule(policy, cfg.rotation_horizon)) schedule.push_back(name_of(r));
    Json needs = Json::array();
    for (const auto& n : ai.needs) needs.push_back(Json{{"need", n.need}, {"note", n.note}});
    Json ranked = Json::array();
    for (auto r : rec.ranked) ranked.push_back(name_of(r));
    Json breakdown = Json::object();
    Json scores = Json::object();
    for (auto r : role_model::kAllRoles) {
      Json per = Json::object();
      for (auto t : kAllTraits) per[std::string(trait_letter(t))] = rec.breakdown[role_model::index(r)][index(t)];
      breakdown[name_of(r)] = per;
      scores[name_of(r)] = rec.score(r);
    }
    rows.push_back(Json{
        {"member", m.member},
        {"archetype", std::string(role_model::archetype_name(kind))},
        {"ai_specialization", std::string(role_model::specialization_name(role_model::specialization_of(kind)))},
        {"z", trait_object(m.z)},
        {"role_scores", scores},
        {"score_breakdown", breakdown},
        {"ranked", ranked},
        {"recommended_role", name_of(rec.chosen)},
        {"ai_mode",
         {{"primary", std::string(role_model::ai_mode_name(ai.primary_mode))},
          {"rationale", ai.rationale},
          {"needs", needs}}},
        {"rotation", {{"fractions", fractions}, {"published", policy.published}, {"schedule", schedule}}}});
    tms.push_back(pairing::TeamMember{m.member, kind, m.z, rec.score(role_model::Role::kSolo)});
  }

  Json note = nullptr;
  auto& assignment = out.assignment;
  if (tms.size() < 2) {
    for (const auto& m : tms) assignment.unpaired.push_back(m.id);
    note = "fewer than two members; everyone works Solo";
  } else {
    try {
      assignment = pairing::match_team(tms, cfg.pairing);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInfeasibleMatching) throw;
      assignment = {};
      for (const auto& m : tms) assignment.unpaired.push_back(m.id);
      note = std::string("no allowed pair: ") + e.what();
    }
  }
  std::map<std::string, const pairing::TeamMember*> by_id;
  for (const auto& m : tms) by_id[m.id] = &m;
  Json pairs = Json::array();
  for (const auto& [x, y] : assignment.pairs) {
    auto ps = pairing::pair_score(*by_id[x], *by_id[y], cfg.pairing);
    pairs.push_back(Json{{"members", Json::array({x, y})},
                         {"score", ps.score},
                         {"flags", flags_json(ps)},
                         {"rationale_tags", ps.rationale},
                         {"rationale", pairing::explain_pair(ps)}});
  }
  out.bundle = Json{{"team", std::string(team_id)},
                    {"effect_model", model.version()},
                    {"high_threshold", cfg.high_threshold},
                    {"members", rows},
                    {"assignment",
                     {{"pairs", pairs},
                      {"unpaired", assignment.unpaired},
                      {"total_score", assignment.total_score},
                      {"note", note}}}};
  return out;
}

Json recommend(const service::ConfigBundle& bundle, const Json& request) {
  auto members = read_members(request);
  if (members.empty()) throw Error(ErrorCode::kIncompleteAssessments, "no members given");
  std::string team = request.is_object() ? request.value("team", std::string("batch")) : "batch";
  return compose(team, members, bundle).bundle;
}

Json match(const service::ConfigBundle& bundle, const Json& request) {
  const auto& cfg = bundle.config();
  std::vector<pairing::TeamMember> tms;
  for (const auto& m : read_members(request)) {
    auto rec = role_model::score_roles(m.z, bundle.model());
    tms.push_back(pairing::TeamMember{m.member, role_model::classify_archetype(m.z, cfg.high_threshold), m.z,
                                      rec.score(role_model::Role::kSolo)});
  }
  auto assignment = pairing::match_team(tms, cfg.pairing);
  std::map<std::string, const pairing::TeamMember*> by_id;
  for (const auto& m : tms) by_id[m.id] = &m;
  Json pairs = Json::array();
  for (const auto& [x, y] : assignment.pairs) {
    auto ps = pairing::pair_score(*by_id[x], *by_id[y], cfg.pairing);
    pairs.push_back(Json{{"members", Json::array({x, y})},
                         {"score", ps.score},
                         {"flags", flags_json(ps)},
                         {"rationale", pairing::explain_pair(ps)}});
  }
  return Json{{"pairs", pairs}, {"unpaired", assignment.unpaired}, {"total_score", assignment.total_score}};
}

}  // namespace roma::batch
