#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "roma/traits.hpp"

namespace roma::psychometrics {

enum class InstrumentKind { kBfi10, kBfi44, kImiIe, kMwms };

std::string_view instrument_kind_name(InstrumentKind kind) noexcept;
std::optional<InstrumentKind> parse_instrument_kind(std::string_view text) noexcept;

struct ItemKey {
  int item_id = 0;
  std::string subscale;  // trait letter for BFI, subscale name otherwise
  bool reversed = false;
};

// Immutable once parsed. Items are kept sorted by id.
class InstrumentDefinition {
 public:
  // Parses the checksummed `roma-instrument` record format (see
  // docs/formats.md). Throws Error(kFormatError / kChecksumMismatch).
  static InstrumentDefinition parse(std::string_view text);

  InstrumentKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  const std::string& version() const noexcept { return version_; }
  int scale_min() const noexcept { return scale_min_; }
  int scale_max() const noexcept { return scale_max_; }
  std::span<const ItemKey> items() const noexcept { return items_; }
  // Subscales in their declared reporting order.
  const std::vector<std::string>& subscales() const noexcept { return subscales_; }

  const ItemKey* find(int item_id) const noexcept;
  int reverse(int value) const noexcept { return scale_min_ + scale_max_ - value; }
  double normalize(double raw) const noexcept {
    return (raw - scale_min_) / static_cast<double>(scale_max_ - scale_min_);
  }

 private:
  InstrumentDefinition() = default;

  InstrumentKind kind_ = InstrumentKind::kBfi10;
  std::string name_;
  std::string version_;
  int scale_min_ = 1;
  int scale_max_ = 5;
  std::vector<ItemKey> items_;
  std::vector<std::string> subscales_;
};

struct ItemResponse {
  int item_id = 0;
  int value = 0;
};

enum class ProfileSource { kBfi10, kBfi44, kManual };

std::string_view profile_source_name(ProfileSource source) noexcept;

struct PersonalityProfile {
  TraitVector traits{};  // each in [1, 5]
  ProfileSource source = ProfileSource::kManual;
  Timestamp assessed_at = 0;

  double trait(Trait t) const noexcept { return traits[index(t)]; }

  // Validates the [1, 5] range; throws Error(kOutOfScaleValue).
  static PersonalityProfile manual(const TraitVector& traits, Timestamp at = 0);
};

// Per-trait population mean and SD used for standardization.
struct TraitNorms {
  TraitVector mean{};
  TraitVector sd{};

  // Trait means/SDs of the N = 66 reference cohort.
  static TraitNorms reference() noexcept;
};

enum class RoleContext {
  kPilot,
  kNavigator,
  kSolo,
  kCoPilotMode,
  kCoNavigatorMode,
  kAgentMode,
};

std::string_view role_context_name(RoleContext ctx) noexcept;
std::optional<RoleContext> parse_role_context(std::string_view text) noexcept;

using SubscaleScores = std::vector<std::pair<std::string, double>>;

struct MotivationSample {
  std::string member_id;
  std::string session_id;
  RoleContext role_context = RoleContext::kSolo;
  double raw_score = 0.0;
  double normalized = 0.0;  // (raw - min) / (max - min)
  InstrumentKind instrument = InstrumentKind::kImiIe;
  Timestamp taken_at = 0;
  SubscaleScores subscales;  // MWMS only
};

// Builds a sample, deriving `normalized` from the instrument's scale.
// Throws Error(kOutOfScaleValue) when raw is outside the scale.
MotivationSample make_sample(std::string member_id, std::string session_id,
                             RoleContext ctx, double raw,
                             const InstrumentDefinition& def, Timestamp at);

inline int reverse_key(int value, int scale_min, int scale_max) noexcept {
  return scale_min + scale_max - value;
}

// Mean of each subscale's items after reverse-keying, in declared order.
// Every item of `def` must be answered exactly once.
// Errors: kUnknownItem, kDuplicateItem, kOutOfScaleValue, kMissingItem.
SubscaleScores score_subscales(std::span<const ItemResponse> responses,
                               const InstrumentDefinition& def);

PersonalityProfile score_bfi(std::span<const ItemResponse> responses,
                             const InstrumentDefinition& def,
                             Timestamp assessed_at = 0);

// Interest/Enjoyment mean on the instrument's own scale.
double score_imi(std::span<const ItemResponse> responses,
                 const InstrumentDefinition& def);

// Subscale means ordered along the self-determination continuum.
SubscaleScores score_mwms(std::span<const ItemResponse> responses,
                          const InstrumentDefinition& def);

// Mean of the autonomous subscales (identified, intrinsic) used as the
// scalar MWMS pulse value.
double mwms_autonomous_composite(const SubscaleScores& scores);

// z_t = (p_t - mean_t) / sd_t. Throws Error(kZeroVariance) on sd <= 0.
ZVector zscore_profile(const PersonalityProfile& profile, const TraitNorms& norms);

}  // namespace roma::psychometrics
