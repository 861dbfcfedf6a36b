#include <fstream>
#include <set>
#include <sstream>

#include "roma/bundled.hpp"
#include "roma/error.hpp"
#include "roma/service.hpp"

namespace roma::service {
namespace {

constexpr std::string_view kBundledPrefix = "bundled:";

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::kConfigError, what);
}

void check_keys(const Json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) config_error(std::string(where) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) config_error("unknown config key " + std::string(where) + "." + key);
  }
}

template <typename T>
void read(const Json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const Json::exception&) {
    config_error(std::string("config key '") + key + "' has the wrong type");
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Returns (name, text) for a bundled or on-disk reference.
std::pair<std::string, std::string> resolve(const std::string& ref, const std::filesystem::path& base,
                                            std::string_view bundled_dir, std::string_view ext) {
  if (ref.starts_with(kBundledPrefix)) {
    std::string name = ref.substr(kBundledPrefix.size());
    std::string path = std::string(bundled_dir) + name;
    if (!ext.empty() && !name.ends_with(ext)) path += ext;
    try {
      return {name, std::string(bundled::file(path))};
    } catch (const Error&) {
      config_error("no bundled file for '" + ref + "'");
    }
  }
  std::filesystem::path p(ref);
  if (p.is_relative() && !base.empty()) p = base / p;
  return {p.stem().string(), read_text(p)};
}

}  // namespace

ServiceConfig ServiceConfig::parse(std::string_view json_text) {
  Json j = Json::parse(json_text, nullptr, false);
  if (j.is_discarded()) config_error("config is not valid JSON");
  check_keys(j, "config",
             {"config_version", "hash", "instruments", "effect_model", "thresholds", "pairing",
              "team", "policy_version", "member_team_dashboard", "admin_token", "salt",
              "token_secret"});
  ServiceConfig c;
  read(j, "config_version", c.config_version);
  if (c.config_version != kConfigVersion) {
    config_error("unsupported config_version " + std::to_string(c.config_version));
  }
  read(j, "hash", c.hash);
  if (c.hash != crypto::kHashName) config_error("unsupported hash '" + c.hash + "'");
  read(j, "instruments", c.instruments);
  read(j, "effect_model", c.effect_model);
  read(j, "policy_version", c.policy_version);
  read(j, "member_team_dashboard", c.member_team_dashboard);
  for (auto [key, field] : {std::pair{"admin_token", &c.admin_token}, std::pair{"salt", &c.salt},
                            std::pair{"token_secret", &c.token_secret}}) {
    if (!j.contains(key) || j[key].is_null()) continue;
    std::string v;
    read(j, key, v);
    if (v.empty()) config_error(std::string(key) + " must not be empty");
    *field = v;
  }

  if (j.contains("thresholds")) {
    const Json& t = j["thresholds"];
    check_keys(t, "thresholds",
               {"high", "delta_sd_factor", "fixed_delta", "founding_samples",
                "mwms_founding_samples", "anonymity_k", "reassessment_days"});
    read(t, "high", c.high_threshold);
    read(t, "delta_sd_factor", c.monitor.delta_sd_factor);
    if (t.contains("fixed_delta") && !t["fixed_delta"].is_null()) {
      c.monitor.fixed_delta = t["fixed_delta"].get<double>();
    }
    read(t, "founding_samples", c.monitor.founding_samples);
    read(t, "mwms_founding_samples", c.monitor.mwms_founding_samples);
    read(t, "anonymity_k", c.anonymity_k);
    read(t, "reassessment_days", c.monitor.reassessment_interval_days);
  }
  if (j.contains("pairing")) {
    const Json& p = j["pairing"];
    check_keys(p, "pairing", {"synergy", "caution", "hard_constraints", "softened_penalty"});
    read(p, "synergy", c.pairing.synergy);
    read(p, "caution", c.pairing.caution);
    read(p, "hard_constraints", c.pairing.hard_constraints);
    read(p, "softened_penalty", c.pairing.softened_penalty);
  }
  if (j.contains("team")) {
    const Json& t = j["team"];
    check_keys(t, "team", {"max_size", "rotation_horizon", "utc_offset_minutes"});
    read(t, "max_size", c.max_team_size);
    read(t, "rotation_horizon", c.rotation_horizon);
    read(t, "utc_offset_minutes", c.monitor.utc_offset_minutes);
  }
  c.pairing.high_threshold = c.high_threshold;

  if (c.anonymity_k < 3) config_error("anonymity_k must be at least 3");
  if (c.max_team_size < 1 || c.max_team_size > 25) config_error("team.max_size must be 1..25");
  if (c.rotation_horizon < 1) config_error("team.rotation_horizon must be positive");
  if (c.monitor.founding_samples < 1 || c.monitor.mwms_founding_samples < 1) {
    config_error("founding sample counts must be positive");
  }
  if (c.monitor.utc_offset_minutes < -14 * 60 || c.monitor.utc_offset_minutes > 14 * 60) {
    config_error("utc_offset_minutes out of range");
  }
  return c;
}

ServiceConfig ServiceConfig::load(const std::filesystem::path& path) {
  ServiceConfig c = parse(read_text(path));
  c.base_dir = path.parent_path();
  return c;
}

Json ServiceConfig::to_json() const {
  Json j{{"config_version", config_version},
         {"hash", hash},
         {"instruments", instruments},
         {"effect_model", effect_model},
         {"thresholds",
          {{"high", high_threshold},
           {"delta_sd_factor", monitor.delta_sd_factor},
           {"fixed_delta", monitor.fixed_delta ? Json(*monitor.fixed_delta) : Json(nullptr)},
           {"founding_samples", monitor.founding_samples},
           {"mwms_founding_samples", monitor.mwms_founding_samples},
           {"anonymity_k", anonymity_k},
           {"reassessment_days", monitor.reassessment_interval_days}}},
         {"pairing",
          {{"synergy", pairing.synergy},
           {"caution", pairing.caution},
           {"hard_constraints", pairing.hard_constraints},
           {"softened_penalty", pairing.softened_penalty}}},
         {"team",
          {{"max_size", max_team_size},
           {"rotation_horizon", rotation_horizon},
           {"utc_offset_minutes", monitor.utc_offset_minutes}}},
         {"policy_version", policy_version},
         {"member_team_dashboard", member_team_dashboard}};
  return j;
}

ConfigBundle::ConfigBundle(ServiceConfig config) : config_(std::move(config)) {
  try {
    for (const auto& ref : config_.instruments) {
      auto [name, text] = resolve(ref, config_.base_dir, "instruments/", ".inst");
      if (name.ends_with(".inst")) name.resize(name.size() - 5);
      if (instruments_.count(name)) config_error("instrument '" + name + "' listed twice");
      instruments_.emplace(name, psychometrics::InstrumentDefinition::parse(text));
    }
    auto [_, model_text] = resolve(config_.effect_model, config_.base_dir, "", "");
    model_ = std::make_shared<const role_model::RoleEffectModel>(
        role_model::RoleEffectModel::parse(model_text));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfigError) throw;
    config_error(std::string("config reference failed to load: ") + e.what());
  }
}

const psychometrics::InstrumentDefinition& ConfigBundle::instrument(std::string_view name) const {
  auto it = instruments_.find(name);
  if (it == instruments_.end()) {
    throw Error(ErrorCode::kUnknownInstrument, "unknown instrument '" + std::string(name) + "'");
  }
  return it->second;
}

std::vector<std::string> ConfigBundle::instrument_names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : instruments_) out.push_back(name);
  return out;
}

}  // namespace roma::service
