#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "roma/pairing.hpp"
#include "roma/service.hpp"

// Stateless operations over JSON and text inputs, shared by the CLI, the C
// API and the service.
namespace roma::batch {

using Json = nlohmann::json;

// {"instrument": name, "responses": {...} | [...], "member"?, "role_context"?,
// "session"?, "at"?} or an array of such records (answered in order).
Json score(const service::ConfigBundle& bundle, const Json& request);

// Cohort text as accepted by clustering::parse_cohort. A fixed `k` skips
// selection.
Json cluster(std::string_view cohort_text, std::size_t k_min, std::size_t k_max,
             std::optional<std::size_t> k = std::nullopt);

struct BundleMember {
  std::string member;
  ZVector z{};
};

struct Composed {
  Json bundle;
  pairing::TeamAssignment assignment;
};

// Role, AI-mode and rotation recommendations per member plus the team
// assignment. Fewer than two members, or no allowed pair, leaves everyone
// unpaired with a note.
Composed compose(std::string_view team_id, std::span<const BundleMember> members,
                 const service::ConfigBundle& bundle);

// {"team"?, "members": [{"member", "traits": {O,C,E,A,N}} | {"member", "z": {...}}]}
Json recommend(const service::ConfigBundle& bundle, const Json& request);

// Same member input; returns only the assignment with pair scores.
Json match(const service::ConfigBundle& bundle, const Json& request);

// Object keyed by item id, or an array of values (items 1..n) or of
// {"item", "value"} objects. Throws Error(kValidationFailure).
std::vector<psychometrics::ItemResponse> parse_responses(const Json& j);

// Reads {"O":..,"C":..} or a 5-element array.
TraitVector trait_vector(const Json& j);
Json trait_object(const TraitVector& t);

}  // namespace roma::batch
