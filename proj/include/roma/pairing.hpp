#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "roma/role_model.hpp"
#include "roma/traits.hpp"

namespace roma::pairing {

// Pairing weights are configuration, not published values.
struct PairingWeights {
  int synergy = 2;
  int caution = -2;
  // When false, high-neuroticism constraints become a penalty instead of an
  // exclusion.
  bool hard_constraints = true;
  int softened_penalty = -10;
  double high_threshold = role_model::kDefaultHighThreshold;
};

struct TeamMember {
  std::string id;
  std::optional<role_model::ArchetypeKind> archetype;  // nullopt = unclassified
  ZVector z{};
  double solo_score = 0.0;  // role-model Solo score, used for odd teams
};

enum class PairFlag : unsigned { kSynergy = 1u, kCaution = 2u, kForbidden = 4u };

struct PairScore {
  std::string member_a;
  std::string member_b;
  role_model::ArchetypeKind archetype_a = role_model::ArchetypeKind::kAdapter;
  role_model::ArchetypeKind archetype_b = role_model::ArchetypeKind::kAdapter;
  int score = 0;
  unsigned flags = 0;
  std::vector<std::string> rationale;  // machine tags, order-independent of (a, b)

  bool has(PairFlag f) const noexcept { return (flags & static_cast<unsigned>(f)) != 0; }
  bool forbidden() const noexcept { return has(PairFlag::kForbidden); }
};

// Symmetric in (a, b) apart from the member order recorded in the result.
// Throws Error(kUnclassifiedMember).
PairScore pair_score(const TeamMember& a, const TeamMember& b,
                     const PairingWeights& weights = {});

struct TeamAssignment {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<std::string> unpaired;
  int total_score = 0;
};

// Precomputed scores for every unordered member pair (index-based).
class PairTable {
 public:
  PairTable(std::span<const TeamMember> members, const PairingWeights& weights);

  std::size_t size() const noexcept { return n_; }
  const PairScore& at(std::size_t i, std::size_t j) const noexcept {
    return i < j ? scores_[i * n_ + j] : scores_[j * n_ + i];
  }
  bool allowed(std::size_t i, std::size_t j) const noexcept { return !at(i, j).forbidden(); }
  // Marks a pair as excluded (used for re-matching without a given pair).
  void exclude(std::size_t i, std::size_t j);

 private:
  std::size_t n_;
  std::vector<PairScore> scores_;
};

// Exact search is used up to this many members to be matched.
inline constexpr std::size_t kExactMatchLimit = 10;

// Maximizes the number of pairs, then the total score, over the
// non-Forbidden pair graph. For odd teams the member with the highest Solo
// score (earliest on ties) sits out first. Deterministic for a fixed member
// order. Throws Error(kInfeasibleMatching) when a team of two or more cannot
// form a single pair, and Error(kInvalidArgument) for fewer than two members.
TeamAssignment match_team(std::span<const TeamMember> members,
                          const PairingWeights& weights = {});
TeamAssignment match_team(std::span<const TeamMember> members, const PairTable& table);

// Human-readable rationale for a scored pair.
std::string explain_pair(const PairScore& pair);

}  // namespace roma::pairing
