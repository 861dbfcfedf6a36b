#include "roma/psychometrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "roma/error.hpp"
#include "roma/record_file.hpp"

namespace roma::psychometrics {
namespace {

int parse_int(const std::string& token, const char* what) {
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || token.empty()) {
    throw Error(ErrorCode::kFormatError,
                std::string("expected integer ") + what + ", got '" + token + "'");
  }
  return value;
}

}  // namespace

std::string_view instrument_kind_name(InstrumentKind kind) noexcept {
  switch (kind) {
    case InstrumentKind::kBfi10: return "BFI10";
    case InstrumentKind::kBfi44: return "BFI44";
    case InstrumentKind::kImiIe: return "IMI_IE";
    case InstrumentKind::kMwms: return "MWMS";
  }
  return "?";
}

std::optional<InstrumentKind> parse_instrument_kind(std::string_view text) noexcept {
  for (auto k : {InstrumentKind::kBfi10, InstrumentKind::kBfi44,
                 InstrumentKind::kImiIe, InstrumentKind::kMwms}) {
    if (instrument_kind_name(k) == text) return k;
  }
  return std::nullopt;
}

std::string_view profile_source_name(ProfileSource source) noexcept {
  switch (source) {
    case ProfileSource::kBfi10: return "BFI10";
    case ProfileSource::kBfi44: return "BFI44";
    case ProfileSource::kManual: return "manual";
  }
  return "?";
}

std::string_view role_context_name(RoleContext ctx) noexcept {
  switch (ctx) {
    case RoleContext::kPilot: return "Pilot";
    case RoleContext::kNavigator: return "Navigator";
    case RoleContext::kSolo: return "Solo";
    case RoleContext::kCoPilotMode: return "CoPilotMode";
    case RoleContext::kCoNavigatorMode: return "CoNavigatorMode";
    case RoleContext::kAgentMode: return "AgentMode";
  }
  return "?";
}

std::optional<RoleContext> parse_role_context(std::string_view text) noexcept {
  for (auto c : {RoleContext::kPilot, RoleContext::kNavigator, RoleContext::kSolo,
                 RoleContext::kCoPilotMode, RoleContext::kCoNavigatorMode,
                 RoleContext::kAgentMode}) {
    if (role_context_name(c) == text) return c;
  }
  return std::nullopt;
}

InstrumentDefinition InstrumentDefinition::parse(std::string_view text) {
  auto file = parse_record_file(text, "roma-instrument");
  if (file.format_version != 1) {
    throw Error(ErrorCode::kFormatError, "unsupported roma-instrument version " +
                                             std::to_string(file.format_version));
  }
  InstrumentDefinition def;
  bool saw_instrument = false;
  bool saw_scale = false;
  for (const auto& rec : file.records) {
    const std::string& tag = rec[0];
    if (tag == "instrument") {
      if (rec.size() != 4) {
        throw Error(ErrorCode::kFormatError, "instrument <kind> <name> <version>");
      }
      auto kind = parse_instrument_kind(rec[1]);
      if (!kind) throw Error(ErrorCode::kFormatError, "unknown instrument kind " + rec[1]);
      def.kind_ = *kind;
      def.name_ = rec[2];
      def.version_ = rec[3];
      saw_instrument = true;
    } else if (tag == "scale") {
      if (rec.size() != 3) throw Error(ErrorCode::kFormatError, "scale <min> <max>");
      def.scale_min_ = parse_int(rec[1], "scale min");
      def.scale_max_ = parse_int(rec[2], "scale max");
      if (def.scale_max_ <= def.scale_min_) {
        throw Error(ErrorCode::kFormatError, "scale max must exceed min");
      }
      saw_scale = true;
    } else if (tag == "subscales") {
      def.subscales_.assign(rec.begin() + 1, rec.end());
    } else if (tag == "item") {
      if (rec.size() != 6 || !saw_scale) {
        throw Error(ErrorCode::kFormatError,
                    "item <id> <subscale> <direct|reversed> <min> <max> after scale");
      }
      ItemKey key;
      key.item_id = parse_int(rec[1], "item id");
      key.subscale = rec[2];
      if (rec[3] == "reversed") {
        key.reversed = true;
      } else if (rec[3] != "direct") {
        throw Error(ErrorCode::kFormatError, "keying must be direct or reversed");
      }
      if (parse_int(rec[4], "item min") != def.scale_min_ ||
          parse_int(rec[5], "item max") != def.scale_max_) {
        throw Error(ErrorCode::kFormatError,
                    "item " + rec[1] + " scale bounds disagree with instrument scale");
      }
      if (key.item_id < 1) throw Error(ErrorCode::kFormatError, "item ids are 1-based");
      def.items_.push_back(std::move(key));
    } else {
      throw Error(ErrorCode::kFormatError, "unknown record '" + tag + "'");
    }
  }
  if (!saw_instrument || !saw_scale || def.items_.empty() || def.subscales_.empty()) {
    throw Error(ErrorCode::kFormatError,
                "instrument, scale, subscales and items are all required");
  }
  std::sort(def.items_.begin(), def.items_.end(),
            [](const ItemKey& a, const ItemKey& b) { return a.item_id < b.item_id; });
  for (std::size_t i = 1; i < def.items_.size(); ++i) {
    if (def.items_[i].item_id == def.items_[i - 1].item_id) {
      throw Error(ErrorCode::kFormatError,
                  "item " + std::to_string(def.items_[i].item_id) + " declared twice");
    }
  }
  for (const auto& sub : def.subscales_) {
    bool used = std::any_of(def.items_.begin(), def.items_.end(),
                            [&](const ItemKey& k) { return k.subscale == sub; });
    if (!used) throw Error(ErrorCode::kFormatError, "subscale " + sub + " has no items");
  }
  for (const auto& item : def.items_) {
    if (std::find(def.subscales_.begin(), def.subscales_.end(), item.subscale) ==
        def.subscales_.end()) {
      throw Error(ErrorCode::kFormatError, "item " + std::to_string(item.item_id) +
                                               " uses undeclared subscale " + item.subscale);
    }
  }
  if (def.kind_ == InstrumentKind::kBfi10 || def.kind_ == InstrumentKind::kBfi44) {
    if (def.subscales_.size() != kTraitCount) {
      throw Error(ErrorCode::kFormatError, "BFI instruments declare exactly O C E A N");
    }
    for (const auto& sub : def.subscales_) {
      if (!parse_trait(sub)) throw Error(ErrorCode::kFormatError, "unknown trait " + sub);
    }
  }
  return def;
}

const ItemKey* InstrumentDefinition::find(int item_id) const noexcept {
  auto it = std::lower_bound(items_.begin(), items_.end(), item_id,
                             [](const ItemKey& k, int id) { return k.item_id < id; });
  return (it != items_.end() && it->item_id == item_id) ? &*it : nullptr;
}

PersonalityProfile PersonalityProfile::manual(const TraitVector& traits, Timestamp at) {
  for (Trait t : kAllTraits) {
    double v = traits[index(t)];
    if (!(v >= 1.0 && v <= 5.0)) {
      throw Error(ErrorCode::kOutOfScaleValue,
                  std::string(trait_name(t)) + " must lie in [1, 5]");
    }
  }
  return PersonalityProfile{traits, ProfileSource::kManual, at};
}

TraitNorms TraitNorms::reference() noexcept {
  return TraitNorms{{3.55, 3.02, 2.89, 3.27, 2.93}, {0.96, 0.81, 0.92, 0.77, 0.98}};
}

MotivationSample make_sample(std::string member_id, std::string session_id,
                             RoleContext ctx, double raw,
                             const InstrumentDefinition& def, Timestamp at) {
  if (!(raw >= def.scale_min() && raw <= def.scale_max())) {
    throw Error(ErrorCode::kOutOfScaleValue,
                "motivation score outside [" + std::to_string(def.scale_min()) + ", " +
                    std::to_string(def.scale_max()) + "]");
  }
  MotivationSample s;
  s.member_id = std::move(member_id);
  s.session_id = std::move(session_id);
  s.role_context = ctx;
  s.raw_score = raw;
  s.normalized = def.normalize(raw);
  s.instrument = def.kind();
  s.taken_at = at;
  return s;
}

SubscaleScores score_subscales(std::span<const ItemResponse> responses,
                               const InstrumentDefinition& def) {
  std::vector<bool> seen(def.items().size(), false);
  std::map<std::string, std::pair<double, int>> sums;
  for (const auto& r : responses) {
    const ItemKey* key = def.find(r.item_id);
    if (key == nullptr) {
      throw Error(ErrorCode::kUnknownItem,
                  "item " + std::to_string(r.item_id) + " is not part of " + def.name());
    }
    auto slot = static_cast<std::size_t>(key - def.items().data());
    if (seen[slot]) {
      throw Error(ErrorCode::kDuplicateItem,
                  "item " + std::to_string(r.item_id) + " answered more than once");
    }
    seen[slot] = true;
    if (r.value < def.scale_min() || r.value > def.scale_max()) {
      throw Error(ErrorCode::kOutOfScaleValue,
                  "item " + std::to_string(r.item_id) + " value " +
                      std::to_string(r.value) + " outside [" +
                      std::to_string(def.scale_min()) + ", " +
                      std::to_string(def.scale_max()) + "]");
    }
    int keyed = key->reversed ? def.reverse(r.value) : r.value;
    auto& acc = sums[key->subscale];
    acc.first += keyed;
    acc.second += 1;
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      throw Error(ErrorCode::kMissingItem,
                  "item " + std::to_string(def.items()[i].item_id) + " not answered");
    }
  }
  SubscaleScores out;
  out.reserve(def.subscales().size());
  for (const auto& sub : def.subscales()) {
    const auto& acc = sums.at(sub);
    out.emplace_back(sub, acc.first / acc.second);
  }
  return out;
}

PersonalityProfile score_bfi(std::span<const ItemResponse> responses,
                             const InstrumentDefinition& def, Timestamp assessed_at) {
  if (def.kind() != InstrumentKind::kBfi10 && def.kind() != InstrumentKind::kBfi44) {
    throw Error(ErrorCode::kInvalidArgument, def.name() + " is not a BFI instrument");
  }
  auto scores = score_subscales(responses, def);
  PersonalityProfile p;
  p.source = def.kind() == InstrumentKind::kBfi10 ? ProfileSource::kBfi10
                                                  : ProfileSource::kBfi44;
  p.assessed_at = assessed_at;
  // Non 1-5 BFI variants are rescaled onto the 1-5 range.
  const double span = def.scale_max() - def.scale_min();
  for (const auto& [sub, mean] : scores) {
    double v = (def.scale_min() == 1 && def.scale_max() == 5)
                   ? mean
                   : 1.0 + 4.0 * (mean - def.scale_min()) / span;
    p.traits[index(*parse_trait(sub))] = v;
  }
  return p;
}

double score_imi(std::span<const ItemResponse> responses, const InstrumentDefinition& def) {
  if (def.kind() != InstrumentKind::kImiIe) {
    throw Error(ErrorCode::kInvalidArgument, def.name() + " is not an IMI instrument");
  }
  auto scores = score_subscales(responses, def);
  if (scores.size() != 1) {
    throw Error(ErrorCode::kInvalidArgument, "IMI definitions carry a single subscale");
  }
  return scores.front().second;
}

SubscaleScores score_mwms(std::span<const ItemResponse> responses,
                          const InstrumentDefinition& def) {
  if (def.kind() != InstrumentKind::kMwms) {
    throw Error(ErrorCode::kInvalidArgument, def.name() + " is not an MWMS instrument");
  }
  return score_subscales(responses, def);
}

double mwms_autonomous_composite(const SubscaleScores& scores) {
  double sum = 0.0;
  int n = 0;
  for (const auto& [name, value] : scores) {
    if (name == "identified" || name == "intrinsic") {
      sum += value;
      ++n;
    }
  }
  if (n == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "MWMS scores lack identified/intrinsic subscales");
  }
  return sum / n;
}

ZVector zscore_profile(const PersonalityProfile& profile, const TraitNorms& norms) {
  ZVector z{};
  for (Trait t : kAllTraits) {
    double sd = norms.sd[index(t)];
    if (!(sd > 0.0)) {
      throw Error(ErrorCode::kZeroVariance,
                  std::string("norm SD for ") + std::string(trait_name(t)) + " is not positive");
    }
    z[index(t)] = (profile.trait(t) - norms.mean[index(t)]) / sd;
  }
  return z;
}

}  // namespace roma::psychometrics
