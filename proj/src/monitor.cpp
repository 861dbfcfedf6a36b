#include "roma/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "roma/error.hpp"

namespace roma::monitor {
namespace {

using psychometrics::InstrumentKind;
using psychometrics::MotivationSample;

constexpr std::int64_t kSecondsPerDay = 86400;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

struct Civil {
  int year;
  unsigned month;
  unsigned day;
};

// Days since 1970-01-01 to proleptic Gregorian date.
Civil civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = floor_div(z, 146097);
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {static_cast<int>(y + (m <= 2)), m, d};
}

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = floor_div(y, 400);
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::int64_t local_day(Timestamp t, int offset_minutes) {
  return floor_div(t + static_cast<std::int64_t>(offset_minutes) * 60, kSecondsPerDay);
}

std::vector<MotivationSample> of_kind(std::span<const MotivationSample> samples,
                                      InstrumentKind kind) {
  std::vector<MotivationSample> out;
  for (const auto& s : samples) {
    if (s.instrument == kind) out.push_back(s);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.taken_at < b.taken_at;
  });
  return out;
}

std::pair<double, double> mean_sd(std::span<const MotivationSample> s) {
  double sum = 0.0;
  for (const auto& x : s) sum += x.normalized;
  double m = sum / static_cast<double>(s.size());
  double ss = 0.0;
  for (const auto& x : s) ss += (x.normalized - m) * (x.normalized - m);
  double sd = s.size() > 1 ? std::sqrt(ss / static_cast<double>(s.size() - 1)) : 0.0;
  return {m, sd};
}

template <typename Key, typename KeyFn>
std::vector<PeriodAggregate> series(const std::vector<MotivationSample>& samples, KeyFn key_of) {
  // Sums are accumulated in a canonical order so aggregation does not depend
  // on arrival order.
  std::map<Key, std::vector<const MotivationSample*>> buckets;
  for (const auto& s : samples) buckets[key_of(s.taken_at)].push_back(&s);
  std::vector<PeriodAggregate> out;
  for (auto& [key, members] : buckets) {
    std::sort(members.begin(), members.end(), [](const auto* a, const auto* b) {
      if (a->taken_at != b->taken_at) return a->taken_at < b->taken_at;
      if (a->normalized != b->normalized) return a->normalized < b->normalized;
      return a->session_id < b->session_id;
    });
    PeriodAggregate agg;
    agg.period = key.label();
    double sum = 0.0;
    for (const auto* s : members) {
      sum += s->normalized;
      agg.last_sample_at = std::max(agg.last_sample_at, s->taken_at);
    }
    agg.count = members.size();
    agg.value = sum / static_cast<double>(members.size());
    out.push_back(std::move(agg));
  }
  return out;
}

std::optional<TriggerEvent> detect_run(const std::string& member_id, TriggerKind kind,
                                       const std::vector<PeriodAggregate>& series,
                                       double baseline, double delta) {
  const double threshold = baseline - delta;
  const std::size_t n = series.size();
  if (n < 2) return std::nullopt;
  auto below = [&](std::size_t i) { return series[i].value < threshold; };
  if (!below(n - 1) || !below(n - 2)) return std::nullopt;
  std::size_t start = n - 2;
  while (start > 0 && below(start - 1)) --start;
  TriggerEvent ev;
  ev.member_id = member_id;
  ev.kind = kind;
  ev.evidence = {series[start], series[start + 1]};
  ev.baseline = baseline;
  ev.delta = delta;
  ev.threshold = threshold;
  ev.fired_at = series[start + 1].last_sample_at;
  return ev;
}

}  // namespace

std::string IsoWeek::label() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-W%02d", year, week);
  return buf;
}

std::string Month::label() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

IsoWeek iso_week(Timestamp t, int utc_offset_minutes) {
  const std::int64_t day = local_day(t, utc_offset_minutes);
  // 1970-01-01 was a Thursday; ISO weekday Monday = 0.
  const std::int64_t weekday = floor_div(day + 3, 7) * -7 + day + 3;
  const std::int64_t thursday = day - weekday + 3;
  const Civil c = civil_from_days(thursday);
  const std::int64_t jan1 = days_from_civil(c.year, 1, 1);
  return IsoWeek{c.year, static_cast<int>((thursday - jan1) / 7 + 1)};
}

Month calendar_month(Timestamp t, int utc_offset_minutes) {
  const Civil c = civil_from_days(local_day(t, utc_offset_minutes));
  return Month{c.year, static_cast<int>(c.month)};
}

Baseline establish_baseline(std::string member_id, std::span<const MotivationSample> samples,
                            const MonitorConfig& config, int version) {
  const std::size_t k = std::max<std::size_t>(1, config.founding_samples);
  auto imi = of_kind(samples, InstrumentKind::kImiIe);
  if (imi.size() < k) {
    throw Error(ErrorCode::kInsufficientSamples,
                "baseline needs " + std::to_string(k) + " IMI samples, have " +
                    std::to_string(imi.size()));
  }
  Baseline b;
  b.member_id = std::move(member_id);
  b.version = version;
  std::span<const MotivationSample> founding(imi.data(), k);
  std::tie(b.imi, b.imi_sd) = mean_sd(founding);
  b.established_from = k;
  b.established_at = founding.back().taken_at;

  const std::size_t km = std::max<std::size_t>(1, config.mwms_founding_samples);
  auto mwms = of_kind(samples, InstrumentKind::kMwms);
  if (mwms.size() >= km) {
    std::span<const MotivationSample> mf(mwms.data(), km);
    auto [m, sd] = mean_sd(mf);
    b.mwms = m;
    b.mwms_sd = sd;
    if (!mf.front().subscales.empty()) {
      b.mwms_subscales = mf.front().subscales;
      for (auto& [name, value] : b.mwms_subscales) {
        double sum = 0.0;
        for (const auto& s : mf) {
          for (const auto& [n2, v2] : s.subscales) {
            if (n2 == name) sum += v2;
          }
        }
        value = sum / static_cast<double>(km);
      }
    }
  }
  return b;
}

std::optional<double> weekly_aggregate(std::span<const MotivationSample> samples,
                                       const IsoWeek& week, const MonitorConfig& config) {
  std::vector<double> values;
  for (const auto& s : samples) {
    if (s.instrument == InstrumentKind::kImiIe &&
        iso_week(s.taken_at, config.utc_offset_minutes) == week) {
      values.push_back(s.normalized);
    }
  }
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::vector<PeriodAggregate> weekly_series(std::span<const MotivationSample> samples,
                                           const MonitorConfig& config) {
  int offset = config.utc_offset_minutes;
  return series<IsoWeek>(of_kind(samples, InstrumentKind::kImiIe),
                         [offset](Timestamp t) { return iso_week(t, offset); });
}

std::vector<PeriodAggregate> monthly_series(std::span<const MotivationSample> samples,
                                            const MonitorConfig& config) {
  int offset = config.utc_offset_minutes;
  return series<Month>(of_kind(samples, InstrumentKind::kMwms),
                       [offset](Timestamp t) { return calendar_month(t, offset); });
}

std::string_view trigger_kind_name(TriggerKind k) noexcept {
  switch (k) {
    case TriggerKind::kImiBelowBaseline2Weeks: return "ImiBelowBaseline2Weeks";
    case TriggerKind::kMwmsBelowBaseline2Months: return "MwmsBelowBaseline2Months";
    case TriggerKind::kVelocityDecline: return "VelocityDecline";
    case TriggerKind::kPhaseTransition: return "PhaseTransition";
  }
  return "?";
}

std::optional<TriggerKind> parse_trigger_kind(std::string_view text) noexcept {
  for (auto k : {TriggerKind::kImiBelowBaseline2Weeks, TriggerKind::kMwmsBelowBaseline2Months,
                 TriggerKind::kVelocityDecline, TriggerKind::kPhaseTransition}) {
    if (trigger_kind_name(k) == text) return k;
  }
  return std::nullopt;
}

std::string TriggerEvent::id() const {
  std::string period = evidence.empty() ? std::to_string(fired_at) : evidence.back().period;
  return std::string(trigger_kind_name(kind)) + ":" + member_id + ":" + period;
}

double imi_delta(const Baseline& b, const MonitorConfig& config) {
  return config.fixed_delta ? *config.fixed_delta : config.delta_sd_factor * b.imi_sd;
}

double mwms_delta(const Baseline& b, const MonitorConfig& config) {
  return config.fixed_delta ? *config.fixed_delta : config.delta_sd_factor * b.mwms_sd;
}

std::vector<TriggerEvent> evaluate_triggers(const std::string& member_id,
                                            const Baseline* baseline,
                                            std::span<const MotivationSample> history,
                                            const MonitorConfig& config) {
  if (baseline == nullptr) {
    throw Error(ErrorCode::kNoBaseline, "member " + member_id + " has no baseline");
  }
  std::vector<TriggerEvent> out;
  if (auto ev = detect_run(member_id, TriggerKind::kImiBelowBaseline2Weeks,
                           weekly_series(history, config), baseline->imi,
                           imi_delta(*baseline, config))) {
    out.push_back(std::move(*ev));
  }
  if (baseline->mwms) {
    if (auto ev = detect_run(member_id, TriggerKind::kMwmsBelowBaseline2Months,
                             monthly_series(history, config), *baseline->mwms,
                             mwms_delta(*baseline, config))) {
      out.push_back(std::move(*ev));
    }
  }
  return out;
}

TriggerEvent external_signal(std::string member_or_team, TriggerKind kind, std::string note,
                             Timestamp at) {
  if (kind != TriggerKind::kVelocityDecline && kind != TriggerKind::kPhaseTransition) {
    throw Error(ErrorCode::kInvalidArgument,
                "only VelocityDecline and PhaseTransition are external signals");
  }
  TriggerEvent ev;
  ev.member_id = std::move(member_or_team);
  ev.kind = kind;
  ev.note = std::move(note);
  ev.fired_at = at;
  return ev;
}

bool reassessment_due(Timestamp assessed_at, Timestamp now, const MonitorConfig& config) {
  return now - assessed_at >=
         static_cast<std::int64_t>(config.reassessment_interval_days) * kSecondsPerDay;
}

std::string_view intervention_kind_name(InterventionKind k) noexcept {
  switch (k) {
    case InterventionKind::kRoleAdjustment: return "RoleAdjustment";
    case InterventionKind::kPairReconfiguration: return "PairReconfiguration";
    case InterventionKind::kSkillDevelopment: return "SkillDevelopment";
  }
  return "?";
}

std::vector<Intervention> propose_interventions(const std::optional<TriggerEvent>& trigger,
                                                const InterventionContext& ctx) {
  std::vector<Intervention> out;
  if (!trigger) return out;

  Intervention role;
  role.kind = InterventionKind::kRoleAdjustment;
  role.from_role = ctx.current_role;
  role.to_role = ctx.recommendation.next_best(ctx.current_role);
  role.detail = "temporarily switch from " + std::string(role_model::role_name(ctx.current_role)) +
                " to " + std::string(role_model::role_name(*role.to_role));
  out.push_back(std::move(role));

  if (ctx.current_pair) {
    Intervention pair;
    pair.kind = InterventionKind::kPairReconfiguration;
    const auto& p = *ctx.current_pair;
    pair.current_partner = p.member_a == ctx.member_id ? p.member_b : p.member_a;
    pair.detail = "re-run matching without the current pair";
    if (p.has(pairing::PairFlag::kCaution)) pair.detail += " (current pair carries a caution flag)";
    out.push_back(std::move(pair));
  }

  Intervention skill;
  skill.kind = InterventionKind::kSkillDevelopment;
  skill.detail = "plan skill development toward roles outside the current preference";
  out.push_back(std::move(skill));
  return out;
}

}  // namespace roma::monitor
