#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "roma/pairing.hpp"
#include "roma/psychometrics.hpp"
#include "roma/role_model.hpp"

namespace roma::monitor {

struct MonitorConfig {
  std::size_t founding_samples = 6;
  std::size_t mwms_founding_samples = 3;
  // delta = factor * founding-sample SD; fixed_delta overrides when set.
  // A delta of 0 reproduces the literal "below baseline" rule.
  double delta_sd_factor = 0.5;
  std::optional<double> fixed_delta;
  // Team timezone as a fixed offset from UTC.
  int utc_offset_minutes = 0;
  int reassessment_interval_days = 91;
};

// Immutable once established; recalibration produces a new version.
struct Baseline {
  std::string member_id;
  int version = 1;
  double imi = 0.0;     // normalized mean of the founding samples
  double imi_sd = 0.0;  // sample SD of the founding samples
  std::optional<double> mwms;  // normalized autonomous composite
  double mwms_sd = 0.0;
  psychometrics::SubscaleScores mwms_subscales;  // raw means, continuum order
  std::size_t established_from = 0;
  Timestamp established_at = 0;
};

// Uses the first k IMI samples by time (stable for equal times).
// Throws Error(kInsufficientSamples).
Baseline establish_baseline(std::string member_id,
                            std::span<const psychometrics::MotivationSample> samples,
                            const MonitorConfig& config = {}, int version = 1);

struct IsoWeek {
  int year = 0;
  int week = 0;
  auto operator<=>(const IsoWeek&) const = default;
  std::string label() const;  // e.g. 2026-W07
};

struct Month {
  int year = 0;
  int month = 0;
  auto operator<=>(const Month&) const = default;
  std::string label() const;  // e.g. 2026-02
};

IsoWeek iso_week(Timestamp t, int utc_offset_minutes = 0);
Month calendar_month(Timestamp t, int utc_offset_minutes = 0);

// Mean normalized IMI score of the given week; nullopt when empty.
std::optional<double> weekly_aggregate(std::span<const psychometrics::MotivationSample> samples,
                                       const IsoWeek& week, const MonitorConfig& config = {});

struct PeriodAggregate {
  std::string period;  // week or month label
  double value = 0.0;
  std::size_t count = 0;
  Timestamp last_sample_at = 0;
};

// Non-empty weekly IMI aggregates in chronological order.
std::vector<PeriodAggregate> weekly_series(std::span<const psychometrics::MotivationSample> samples,
                                           const MonitorConfig& config = {});
// Non-empty monthly MWMS aggregates in chronological order.
std::vector<PeriodAggregate> monthly_series(std::span<const psychometrics::MotivationSample> samples,
                                            const MonitorConfig& config = {});

enum class TriggerKind {
  kImiBelowBaseline2Weeks,
  kMwmsBelowBaseline2Months,
  kVelocityDecline,
  kPhaseTransition,
};

std::string_view trigger_kind_name(TriggerKind k) noexcept;
std::optional<TriggerKind> parse_trigger_kind(std::string_view text) noexcept;

struct TriggerEvent {
  std::string member_id;
  TriggerKind kind = TriggerKind::kImiBelowBaseline2Weeks;
  // Aggregates that fired (the two consecutive periods) or the external
  // signal's evidence.
  std::vector<PeriodAggregate> evidence;
  double baseline = 0.0;
  double delta = 0.0;
  double threshold = 0.0;  // baseline - delta
  std::string note;        // external signals only
  Timestamp fired_at = 0;

  // Stable identity: kind, member and the period in which it fired.
  std::string id() const;
};

double imi_delta(const Baseline& b, const MonitorConfig& config);
double mwms_delta(const Baseline& b, const MonitorConfig& config);

// Pure function of (baseline, history, config). Returns at most one event per
// kind: the event of the ongoing below-threshold run, identified by the
// period where the run first produced two consecutive low aggregates. A run
// that keeps going yields the same event, so callers deduplicate by id().
// Throws Error(kNoBaseline) when baseline is null.
std::vector<TriggerEvent> evaluate_triggers(
    const std::string& member_id, const Baseline* baseline,
    std::span<const psychometrics::MotivationSample> history,
    const MonitorConfig& config = {});

// Velocity and phase signals come from the team's tracker.
TriggerEvent external_signal(std::string member_or_team, TriggerKind kind, std::string note,
                             Timestamp at);

bool reassessment_due(Timestamp assessed_at, Timestamp now, const MonitorConfig& config = {});

enum class InterventionKind { kRoleAdjustment, kPairReconfiguration, kSkillDevelopment };

std::string_view intervention_kind_name(InterventionKind k) noexcept;

struct Intervention {
  InterventionKind kind = InterventionKind::kSkillDevelopment;
  std::optional<role_model::Role> from_role;
  std::optional<role_model::Role> to_role;
  std::optional<std::string> current_partner;
  std::string detail;
};

struct InterventionContext {
  role_model::Role current_role = role_model::Role::kSolo;
  role_model::RoleRecommendation recommendation;
  std::optional<pairing::PairScore> current_pair;  // member is member_a or member_b
  std::string member_id;
};

// Ordered: RoleAdjustment, PairReconfiguration (only when paired),
// SkillDevelopment. Empty when there is no trigger.
std::vector<Intervention> propose_interventions(const std::optional<TriggerEvent>& trigger,
                                                const InterventionContext& context);

}  // namespace roma::monitor
