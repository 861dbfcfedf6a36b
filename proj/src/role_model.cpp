#include "roma/role_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "roma/error.hpp"
#include "roma/record_file.hpp"

namespace roma::role_model {
namespace {

double parse_real(const std::string& token) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::kFormatError, "expected a real number, got '" + token + "'");
  }
  return v;
}

bool is_high(double z, double h) noexcept { return z >= h; }
bool is_low(double z, double h) noexcept { return z <= -h; }

AiMode natural_mode(Role r) noexcept {
  switch (r) {
    case Role::kPilot: return AiMode::kCoPilot;
    case Role::kNavigator: return AiMode::kCoNavigator;
    case Role::kSolo: return AiMode::kAgent;
  }
  return AiMode::kCoPilot;
}

}  // namespace

std::string_view role_name(Role r) noexcept {
  switch (r) {
    case Role::kPilot: return "Pilot";
    case Role::kNavigator: return "Navigator";
    case Role::kSolo: return "Solo";
  }
  return "?";
}

std::optional<Role> parse_role(std::string_view text) noexcept {
  for (Role r : kAllRoles) {
    if (role_name(r) == text) return r;
  }
  return std::nullopt;
}

std::string_view archetype_name(ArchetypeKind k) noexcept {
  switch (k) {
    case ArchetypeKind::kExplorer: return "Explorer";
    case ArchetypeKind::kOrchestrator: return "Orchestrator";
    case ArchetypeKind::kCraftsperson: return "Craftsperson";
    case ArchetypeKind::kArchitect: return "Architect";
    case ArchetypeKind::kAdapter: return "Adapter";
  }
  return "?";
}

std::optional<ArchetypeKind> parse_archetype(std::string_view text) noexcept {
  for (auto k : kAllArchetypes) {
    if (archetype_name(k) == text) return k;
  }
  return std::nullopt;
}

std::string_view specialization_name(AiSpecialization s) noexcept {
  switch (s) {
    case AiSpecialization::kPromethean: return "Promethean";
    case AiSpecialization::kConductor: return "Conductor";
    case AiSpecialization::kHermit: return "Hermit";
    case AiSpecialization::kCartographer: return "Cartographer";
    case AiSpecialization::kShapeshifter: return "Shapeshifter";
  }
  return "?";
}

std::string_view ai_mode_name(AiMode m) noexcept {
  switch (m) {
    case AiMode::kCoPilot: return "CoPilot";
    case AiMode::kCoNavigator: return "CoNavigator";
    case AiMode::kAgent: return "Agent";
    case AiMode::kMinimalAi: return "MinimalAI";
  }
  return "?";
}

RoleEffectModel RoleEffectModel::parse(std::string_view text) {
  auto file = parse_record_file(text, "roma-effect-model");
  if (file.format_version != 1) {
    throw Error(ErrorCode::kFormatError, "unsupported roma-effect-model version");
  }
  RoleEffectModel model;
  std::array<bool, kRoleCount> have_base{};
  std::array<std::array<bool, kRoleCount>, kTraitCount> have_mod{};
  std::array<bool, 5> have_rotation{};
  for (const auto& rec : file.records) {
    const auto& tag = rec[0];
    if (tag == "version" && rec.size() == 2) {
      model.version_ = rec[1];
    } else if (tag == "base" && rec.size() == 3) {
      auto role = parse_role(rec[1]);
      if (!role) throw Error(ErrorCode::kFormatError, "unknown role " + rec[1]);
      model.base_[index(*role)] = parse_real(rec[2]);
      have_base[index(*role)] = true;
    } else if (tag == "moderation" && rec.size() == 2 + kRoleCount) {
      auto trait = parse_trait(rec[1]);
      if (!trait) throw Error(ErrorCode::kFormatError, "unknown trait " + rec[1]);
      for (Role r : kAllRoles) {
        model.moderation_[roma::index(*trait)][index(r)] = parse_real(rec[2 + index(r)]);
        have_mod[roma::index(*trait)][index(r)] = true;
      }
    } else if (tag == "rotation" && rec.size() == 3 + kRoleCount) {
      auto kind = parse_archetype(rec[1]);
      if (!kind) throw Error(ErrorCode::kFormatError, "unknown archetype " + rec[1]);
      RotationPolicy policy;
      double sum = 0.0;
      for (Role r : kAllRoles) {
        double f = parse_real(rec[2 + index(r)]);
        if (f < 0.0) throw Error(ErrorCode::kFormatError, "negative rotation fraction");
        policy.fractions[index(r)] = f;
        sum += f;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw Error(ErrorCode::kFormatError,
                    "rotation fractions for " + rec[1] + " do not sum to 1");
      }
      if (rec.back() == "published") {
        policy.published = true;
      } else if (rec.back() == "default") {
        policy.published = false;
      } else {
        throw Error(ErrorCode::kFormatError, "rotation provenance must be published|default");
      }
      model.rotation_[static_cast<std::size_t>(*kind)] = policy;
      have_rotation[static_cast<std::size_t>(*kind)] = true;
    } else {
      throw Error(ErrorCode::kFormatError, "malformed effect-model record '" + tag + "'");
    }
  }
  if (model.version_.empty()) throw Error(ErrorCode::kFormatError, "version missing");
  for (bool b : have_base) {
    if (!b) throw Error(ErrorCode::kFormatError, "effect model lacks a base effect");
  }
  for (const auto& row : have_mod) {
    for (bool b : row) {
      if (!b) throw Error(ErrorCode::kFormatError, "effect model lacks a moderation cell");
    }
  }
  for (bool b : have_rotation) {
    if (!b) throw Error(ErrorCode::kFormatError, "effect model lacks a rotation policy");
  }
  return model;
}

ArchetypeKind classify_archetype(const ZVector& z, double high) noexcept {
  const double o = z[roma::index(Trait::kOpenness)];
  const double c = z[roma::index(Trait::kConscientiousness)];
  const double e = z[roma::index(Trait::kExtraversion)];
  const double a = z[roma::index(Trait::kAgreeableness)];
  const double n = z[roma::index(Trait::kNeuroticism)];
  if (is_high(n, high) && is_low(e, high)) return ArchetypeKind::kCraftsperson;
  if (is_high(e, high) && is_high(a, high)) return ArchetypeKind::kOrchestrator;
  if (is_high(o, high)) return ArchetypeKind::kExplorer;
  if (is_high(c, high)) return ArchetypeKind::kArchitect;
  return ArchetypeKind::kAdapter;
}

Archetype make_archetype(ArchetypeKind kind, const RoleEffectModel& model) noexcept {
  return Archetype{kind, specialization_of(kind), model.rotation(kind)};
}

Role RoleRecommendation::next_best(Role excluded) const noexcept {
  for (Role r : ranked) {
    if (r != excluded) return r;
  }
  return excluded;
}

RoleRecommendation score_roles(const ZVector& z, const RoleEffectModel& model) noexcept {
  RoleRecommendation rec;
  for (Role r : kAllRoles) {
    double total = 0.0;
    for (Trait t : kAllTraits) {
      double term = z[roma::index(t)] * model.moderation(t, r);
      rec.breakdown[index(r)][roma::index(t)] = term;
      total += term;
    }
    rec.moderation_total[index(r)] = total;
    rec.scores[index(r)] = model.base(r) + total;
  }
  rec.ranked = kAllRoles;
  std::stable_sort(rec.ranked.begin(), rec.ranked.end(), [&](Role a, Role b) {
    return rec.scores[index(a)] > rec.scores[index(b)];
  });
  rec.chosen = rec.ranked.front();
  return rec;
}

AiModeRecommendation recommend_ai_mode(const ZVector& z, ArchetypeKind archetype,
                                       const RoleEffectModel& model, double high) {
  AiModeRecommendation out;
  const double o = z[roma::index(Trait::kOpenness)];
  const double n = z[roma::index(Trait::kNeuroticism)];
  if (is_low(o, high) && is_low(n, high)) {
    out.primary_mode = AiMode::kMinimalAi;
    out.rationale = {"low-openness", "high-stability", "prefers-direct-control"};
    out.needs = {{"autonomy", "kept through traditional control"},
                 {"competence", "kept through established skills"},
                 {"relatedness", "human collaboration preferred"}};
    return out;
  }
  switch (archetype) {
    case ArchetypeKind::kExplorer:
      out.primary_mode = AiMode::kCoPilot;
      out.rationale = {"high-openness", "creative-ideation", "rapid-exploration"};
      out.needs = {{"autonomy", "kept through creative control"},
                   {"competence", "grows with a wider option space"},
                   {"relatedness", "little effect"}};
      break;
    case ArchetypeKind::kOrchestrator:
      out.primary_mode = AiMode::kCoNavigator;
      out.rationale = {"high-extraversion", "high-agreeableness", "dialogical-processing"};
      out.needs = {{"autonomy", "kept through conversational control"},
                   {"competence", "built through explanatory dialogue"},
                   {"relatedness", "partly met by quasi-social exchange"}};
      break;
    case ArchetypeKind::kCraftsperson:
      out.primary_mode = AiMode::kAgent;
      out.rationale = {"high-neuroticism", "low-extraversion", "stress-delegation",
                       "solo-work-preserved"};
      out.needs = {{"autonomy", "raised by delegating stressful tasks"},
                   {"competence", "shielded from anxiety interference"},
                   {"relatedness", "kept low to reduce social pressure"}};
      break;
    case ArchetypeKind::kArchitect:
      out.primary_mode = AiMode::kCoPilot;
      out.rationale = {"high-conscientiousness", "mode-flexible", "verification-protocol"};
      out.needs = {{"autonomy", "expressed through quality control"},
                   {"competence", "shown via systematic verification"},
                   {"relatedness", "secondary to task focus"}};
      break;
    case ArchetypeKind::kAdapter: {
      Role top = score_roles(z, model).chosen;
      out.primary_mode = natural_mode(top);
      out.rationale = {"balanced-profile", "multi-modal",
                       "top-role-" + std::string(role_name(top))};
      out.needs = {{"autonomy", "depends on current mode"},
                   {"competence", "depends on current mode"},
                   {"relatedness", "depends on current mode"}};
      break;
    }
  }
  return out;
}

std::array<int, kRoleCount> apportion(const RotationPolicy& policy, int horizon) {
  if (horizon < 1) throw Error(ErrorCode::kInvalidArgument, "horizon must be >= 1");
  std::array<int, kRoleCount> counts{};
  std::array<double, kRoleCount> remainder{};
  int assigned = 0;
  for (Role r : kAllRoles) {
    double quota = policy.fractions[index(r)] * horizon;
    // Guard against representation error such as 0.7 * 10 = 6.9999...
    int whole = static_cast<int>(std::floor(quota + 1e-9));
    counts[index(r)] = whole;
    remainder[index(r)] = std::max(0.0, quota - whole);
    assigned += whole;
  }
  std::array<Role, kRoleCount> order = kAllRoles;
  std::stable_sort(order.begin(), order.end(), [&](Role a, Role b) {
    if (std::abs(remainder[index(a)] - remainder[index(b)]) > 1e-12) {
      return remainder[index(a)] > remainder[index(b)];
    }
    return policy.fractions[index(a)] > policy.fractions[index(b)];
  });
  for (std::size_t i = 0; assigned < horizon; ++i, ++assigned) {
    counts[index(order[i % kRoleCount])] += 1;
  }
  return counts;
}

std::vector<Role> rotation_schedule(const RotationPolicy& policy, int horizon) {
  auto counts = apportion(policy, horizon);
  std::array<int, kRoleCount> placed{};
  std::vector<Role> seq;
  seq.reserve(static_cast<std::size_t>(horizon));
  for (int slot = 0; slot < horizon; ++slot) {
    // Pick the role furthest behind its ideal cumulative share.
    std::optional<Role> best;
    double best_deficit = 0.0;
    for (Role r : kAllRoles) {
      auto i = index(r);
      if (placed[i] >= counts[i]) continue;
      double deficit = static_cast<double>(counts[i]) * (slot + 1) / horizon - placed[i];
      if (!best || deficit > best_deficit + 1e-12 ||
          (std::abs(deficit - best_deficit) <= 1e-12 && counts[i] > counts[index(*best)])) {
        best = r;
        best_deficit = deficit;
      }
    }
    placed[index(*best)] += 1;
    seq.push_back(*best);
  }
  return seq;
}

}  // namespace roma::role_model
