#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "roma/traits.hpp"

namespace roma::role_model {

// Declaration order doubles as the deterministic tie-break priority.
enum class Role { kPilot = 0, kNavigator = 1, kSolo = 2 };
inline constexpr std::size_t kRoleCount = 3;
inline constexpr std::array<Role, kRoleCount> kAllRoles = {Role::kPilot, Role::kNavigator,
                                                           Role::kSolo};
constexpr std::size_t index(Role r) noexcept { return static_cast<std::size_t>(r); }

std::string_view role_name(Role r) noexcept;
std::optional<Role> parse_role(std::string_view text) noexcept;

enum class ArchetypeKind { kExplorer, kOrchestrator, kCraftsperson, kArchitect, kAdapter };
inline constexpr std::array<ArchetypeKind, 5> kAllArchetypes = {
    ArchetypeKind::kExplorer, ArchetypeKind::kOrchestrator, ArchetypeKind::kCraftsperson,
    ArchetypeKind::kArchitect, ArchetypeKind::kAdapter};

std::string_view archetype_name(ArchetypeKind k) noexcept;
std::optional<ArchetypeKind> parse_archetype(std::string_view text) noexcept;

enum class AiSpecialization { kPromethean, kConductor, kHermit, kCartographer, kShapeshifter };

std::string_view specialization_name(AiSpecialization s) noexcept;

constexpr AiSpecialization specialization_of(ArchetypeKind k) noexcept {
  switch (k) {
    case ArchetypeKind::kExplorer: return AiSpecialization::kPromethean;
    case ArchetypeKind::kOrchestrator: return AiSpecialization::kConductor;
    case ArchetypeKind::kCraftsperson: return AiSpecialization::kHermit;
    case ArchetypeKind::kArchitect: return AiSpecialization::kCartographer;
    case ArchetypeKind::kAdapter: return AiSpecialization::kShapeshifter;
  }
  return AiSpecialization::kShapeshifter;
}

// Fraction of sessions per role, indexed by Role. Sums to 1 within 1e-9.
struct RotationPolicy {
  std::array<double, kRoleCount> fractions{};
  bool published = true;  // false for invented defaults
};

struct Archetype {
  ArchetypeKind kind = ArchetypeKind::kAdapter;
  AiSpecialization specialization = AiSpecialization::kShapeshifter;
  RotationPolicy rotation;
};

// 75th percentile of a standard normal.
inline constexpr double kDefaultHighThreshold = 0.675;

// Immutable additive effect model: base effect per role (Solo is the zero
// reference) plus per-SD trait moderation coefficients.
class RoleEffectModel {
 public:
  // Parses the checksummed `roma-effect-model` format. All 3 base effects,
  // all 15 moderation cells and all 5 rotation policies must be present.
  static RoleEffectModel parse(std::string_view text);

  const std::string& version() const noexcept { return version_; }
  double base(Role r) const noexcept { return base_[index(r)]; }
  double moderation(Trait t, Role r) const noexcept {
    return moderation_[roma::index(t)][index(r)];
  }
  const RotationPolicy& rotation(ArchetypeKind k) const noexcept {
    return rotation_[static_cast<std::size_t>(k)];
  }

 private:
  RoleEffectModel() = default;

  std::string version_;
  std::array<double, kRoleCount> base_{};
  std::array<std::array<double, kRoleCount>, kTraitCount> moderation_{};
  std::array<RotationPolicy, 5> rotation_{};
};

// Rule precedence: Craftsperson > Orchestrator > Explorer > Architect > Adapter.
ArchetypeKind classify_archetype(const ZVector& z,
                                 double high = kDefaultHighThreshold) noexcept;

Archetype make_archetype(ArchetypeKind kind, const RoleEffectModel& model) noexcept;

struct RoleRecommendation {
  std::array<double, kRoleCount> scores{};
  // Sum of the moderation terms per role; scores = base + moderation_total.
  std::array<double, kRoleCount> moderation_total{};
  // breakdown[role][trait] = z_trait * moderation(trait, role)
  std::array<std::array<double, kTraitCount>, kRoleCount> breakdown{};
  std::array<Role, kRoleCount> ranked{};
  Role chosen = Role::kPilot;

  double score(Role r) const noexcept { return scores[index(r)]; }
  // Best-ranked role other than `excluded`.
  Role next_best(Role excluded) const noexcept;
};

RoleRecommendation score_roles(const ZVector& z, const RoleEffectModel& model) noexcept;

enum class AiMode { kCoPilot, kCoNavigator, kAgent, kMinimalAi };

std::string_view ai_mode_name(AiMode m) noexcept;

struct NeedImpact {
  std::string need;  // autonomy | competence | relatedness
  std::string note;
};

struct AiModeRecommendation {
  AiMode primary_mode = AiMode::kCoPilot;
  std::vector<std::string> rationale;
  std::vector<NeedImpact> needs;
};

AiModeRecommendation recommend_ai_mode(const ZVector& z, ArchetypeKind archetype,
                                       const RoleEffectModel& model,
                                       double high = kDefaultHighThreshold);

// Largest-remainder apportionment of `horizon` sessions; remainder ties go
// to the larger fraction, then to role priority.
std::array<int, kRoleCount> apportion(const RotationPolicy& policy, int horizon);

// Deterministic role sequence whose counts equal apportion(policy, horizon),
// interleaved so minority roles are spread as evenly as possible.
// Throws Error(kInvalidArgument) for horizon < 1.
std::vector<Role> rotation_schedule(const RotationPolicy& policy, int horizon);

}  // namespace roma::role_model
