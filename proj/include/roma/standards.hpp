#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "roma/monitor.hpp"
#include "roma/pairing.hpp"
#include "roma/psychometrics.hpp"
#include "roma/role_model.hpp"

namespace roma::standards {

using Json = nlohmann::json;

enum class ArtifactKind {
  kTeamCompositionMatrix,
  kPairingBacklogItem,
  kMotivationBaselineReport,
  kSprintMotivationTrend,
  kRetrospectiveGuide,
  kPersonalityOptimizationSummary,
  kAssessmentPolicyRecord,
};

std::string_view artifact_kind_name(ArtifactKind k) noexcept;
std::optional<ArtifactKind> parse_artifact_kind(std::string_view text) noexcept;

struct IsoAnchor {
  std::string code;      // PM.1.6, E3, E3.1 ...
  std::string process;   // PM.1 ... PM.4, SI
  std::vector<std::string> tasks;
  std::string activity;  // Team Assembly ...
};

// The bundled process map (data/iso29110_map.txt).
const std::vector<IsoAnchor>& anchors();
// Throws Error(kUnknownAnchor).
const IsoAnchor& anchor(std::string_view code);
const IsoAnchor& anchor_for(ArtifactKind kind);

struct IsoArtifact {
  ArtifactKind kind;
  IsoAnchor anchor;
  Json body;
  Timestamp generated_at = 0;

  // Throws Error(kUnknownAnchor) when the code is unknown or does not belong
  // to this kind.
  static IsoArtifact make(ArtifactKind kind, std::string_view anchor_code, Json body,
                          Timestamp at);

  Json to_json() const;
  // Machine format: 2-space indented JSON with sorted keys, trailing newline.
  std::string machine() const;
  // Human format: Markdown.
  std::string markdown() const;
  // <anchor>_<kind>_<YYYY-MM-DD>
  std::string file_stem() const;
};

// Replaces every {{slot}} with its value. Throws Error(kFormatError) for a
// slot with no value.
std::string fill_template(std::string_view text, const std::map<std::string, std::string>& slots);

// Fixed-point rendering used in every artifact body (4 decimals).
std::string fixed(double v, int decimals = 4);

struct MatrixMember {
  std::string member;
  std::optional<psychometrics::PersonalityProfile> profile;
  std::optional<role_model::ArchetypeKind> archetype;
  std::optional<role_model::RoleRecommendation> recommendation;
  std::optional<role_model::Role> current_role;
};

// Throws Error(kIncompleteAssessments) for an empty team or a member lacking
// a profile, archetype or recommendation (the message names the member).
IsoArtifact team_composition_matrix(std::string_view team_id,
                                    std::span<const MatrixMember> members, Timestamp at);

struct PlanMember {
  std::string member;
  role_model::Role recommended = role_model::Role::kPilot;
  std::vector<role_model::Role> schedule;  // rotation for the sprint's sessions
};

// One item per pair, each with an embedded Role Review section.
std::vector<IsoArtifact> pairing_backlog_items(std::span<const pairing::PairScore> pairs,
                                               std::span<const PlanMember> members,
                                               std::string_view sprint_id, Timestamp at);

inline constexpr std::size_t kAnonymityThreshold = 3;

struct MemberMotivation {
  std::string member;
  std::optional<monitor::Baseline> baseline;
  std::vector<psychometrics::MotivationSample> samples;
  std::vector<monitor::TriggerEvent> triggers;
};

// Half-open [from, to).
struct ReportPeriod {
  Timestamp from = 0;
  Timestamp to = 0;
  std::string label;
};

// Throws Error(kNoData) when no pulse falls in the period and
// Error(kAnonymityThreshold) for an anonymized view of fewer than 3 members.
IsoArtifact motivation_report(std::string_view team_id, std::span<const MemberMotivation> members,
                              const ReportPeriod& period, bool anonymized,
                              const monitor::MonitorConfig& config, Timestamp at);

struct PairHistory {
  std::string member_a;
  std::string member_b;
  std::vector<std::string> sprints;
  std::vector<double> motivation;  // normalized pulses of both members while paired
  double baseline = 0.0;           // mean of the two members' baselines
};

struct ProjectHistory {
  std::string team_id;
  bool closed = false;
  std::vector<PairHistory> pairs;
  std::map<std::string, std::array<int, role_model::kRoleCount>> role_counts;
  std::map<std::string, int> triggers_by_kind;
};

// Successful pairing: mean motivation >= baseline. Pairs without pulses are
// listed as unmeasured. Throws Error(kProjectOpen).
IsoArtifact closure_summary(const ProjectHistory& history, Timestamp at);

struct PolicyInputs {
  std::string team_id;
  std::string policy_version;
  std::vector<std::string> instruments;
  std::vector<std::string> consent_scopes;
  std::string hash;
  std::size_t anonymity_k = kAnonymityThreshold;
  int reassessment_days = 91;
  std::size_t founding_samples = 6;
  double delta_sd_factor = 0.5;
  std::optional<double> fixed_delta;
  double high_threshold = role_model::kDefaultHighThreshold;
};

IsoArtifact assessment_policy_record(const PolicyInputs& in, Timestamp at);

IsoArtifact baseline_report(std::string_view team_id, std::span<const MemberMotivation> members,
                            const monitor::MonitorConfig& config, Timestamp at);

struct RetrospectiveInputs {
  std::string team_id;
  std::string sprint_id;
  std::vector<monitor::PeriodAggregate> team_trend;  // anonymized weekly means
  std::vector<monitor::TriggerEvent> triggers;
  std::vector<pairing::PairScore> pairs;
};

// Signals are reported as counts per kind, without member ids.
IsoArtifact retrospective_guide(const RetrospectiveInputs& in, Timestamp at);

}  // namespace roma::standards
