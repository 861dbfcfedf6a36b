#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "roma/ledger.hpp"
#include "roma/monitor.hpp"
#include "roma/pairing.hpp"
#include "roma/psychometrics.hpp"
#include "roma/role_model.hpp"

namespace roma::service {

using Json = nlohmann::json;

inline constexpr int kConfigVersion = 1;

// Versioned JSON config. Every field is optional; see docs/formats.md.
struct ServiceConfig {
  int config_version = kConfigVersion;
  std::string hash = std::string(crypto::kHashName);
  // "bundled:<name>" or a path to an instrument file; the request name is
  // the bundled name or the file stem.
  std::vector<std::string> instruments = {"bundled:bfi10", "bundled:bfi44", "bundled:imi_ie",
                                          "bundled:imi_ie_10", "bundled:mwms"};
  std::string effect_model = "bundled:effect_model.txt";
  double high_threshold = role_model::kDefaultHighThreshold;
  monitor::MonitorConfig monitor;
  pairing::PairingWeights pairing;
  std::size_t anonymity_k = 3;
  std::size_t max_team_size = 25;
  int rotation_horizon = 10;
  std::string policy_version = "1";
  // Lets members read the anonymized team trend with their pulse token.
  bool member_team_dashboard = false;
  std::optional<std::string> admin_token;
  // Generated once and kept in the store when absent.
  std::optional<std::string> salt;
  std::optional<std::string> token_secret;
  // Relative instrument and effect-model paths resolve against this.
  std::filesystem::path base_dir;

  // Throws Error(kConfigError).
  static ServiceConfig parse(std::string_view json_text);
  static ServiceConfig load(const std::filesystem::path& path);
  Json to_json() const;
};

// Config with every reference resolved and checksum-verified.
class ConfigBundle {
 public:
  // Throws Error(kConfigError).
  explicit ConfigBundle(ServiceConfig config);

  const ServiceConfig& config() const noexcept { return config_; }
  // Throws Error(kUnknownInstrument).
  const psychometrics::InstrumentDefinition& instrument(std::string_view name) const;
  std::vector<std::string> instrument_names() const;
  const role_model::RoleEffectModel& model() const noexcept { return *model_; }

 private:
  ServiceConfig config_;
  std::map<std::string, psychometrics::InstrumentDefinition, std::less<>> instruments_;
  std::shared_ptr<const role_model::RoleEffectModel> model_;
};

// Thrown by the crash failpoint; nothing after the ledger append runs.
struct InjectedCrash : std::runtime_error {
  InjectedCrash() : std::runtime_error("injected crash after ledger append") {}
};

struct ServiceOptions {
  std::function<Timestamp()> clock;  // defaults to the system clock
  // Called after every ledger append and before the store write.
  std::function<void(std::uint64_t seq)> after_append;
};

// Event-sourced platform state. The ledger is authoritative; the SQLite store
// holds the derived state plus an off-chain directory of personal fields.
//
// Operations take and return JSON (see docs/formats.md for the request
// shapes). Every mutating operation appends exactly one ledger entry and its
// response carries "seq". Errors are thrown as roma::Error.
class Service {
 public:
  Service(std::filesystem::path data_dir, ConfigBundle bundle, ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Dispatches by operation name (create_team, register_member, ...).
  Json call(std::string_view op, const Json& request);
  static const std::vector<std::string>& operations();
  static bool is_mutating(std::string_view op);

  enum class Scope { kAdmin, kLead, kMember };
  // True when `token` grants `scope` (for kMember: over `member_id` of
  // `team_id`; a lead token also passes).
  bool authorize(Scope scope, std::string_view team_id, std::string_view member_id,
                 std::string_view token) const;

  // Canonical state JSON as persisted in the store.
  std::string state_snapshot() const;
  // State rebuilt from an empty state by replaying the whole ledger.
  std::string replay_snapshot() const;
  std::uint64_t applied_seq() const;
  // Ledger entries the store had to catch up on at startup.
  std::uint64_t replayed_on_open() const noexcept;
  const ledger::Ledger& ledger() const noexcept;
  const ConfigBundle& bundle() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Applies one ledger event to the state. Used both live and for replay.
void apply_event(Json& state, std::string_view kind, const Json& data);

// Canonical empty state.
Json empty_state();

}  // namespace roma::service
