#include "roma/roma.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "roma/batch.hpp"
#include "roma/error.hpp"
#include "roma/ledger.hpp"
#include "roma/service.hpp"

struct roma_platform {
  std::unique_ptr<roma::service::Service> service;
};

namespace {

using roma::Error;
using roma::ErrorCode;
using Json = nlohmann::json;

thread_local std::string g_last_error;

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

roma_status status_of(ErrorCode code) { return static_cast<roma_status>(static_cast<int>(code) + 1); }

void put(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

roma_status fail(roma_status status, const std::string& message, char** out) {
  g_last_error = message;
  if (out) {
    Json err{{"error", {{"code", roma_status_name(status)}, {"message", message}}}};
    *out = dup(err.dump());
  }
  return status;
}

// Runs `f`, translating exceptions into status codes.
template <typename F>
roma_status guarded(char** out, F&& f) {
  if (out) *out = nullptr;
  try {
    g_last_error.clear();
    return f();
  } catch (const Error& e) {
    return fail(status_of(e.code()), e.what(), out);
  } catch (const Json::parse_error& e) {
    return fail(ROMA_ERR_INVALID_ARGUMENT, std::string("malformed JSON: ") + e.what(), out);
  } catch (const Json::exception& e) {
    return fail(ROMA_ERR_INVALID_ARGUMENT, std::string("unexpected JSON shape: ") + e.what(), out);
  } catch (const std::exception& e) {
    return fail(ROMA_ERR_INTERNAL, e.what(), out);
  } catch (...) {
    return fail(ROMA_ERR_INTERNAL, "unknown failure", out);
  }
}

roma::service::ConfigBundle load_bundle(const char* config_path) {
  if (config_path && *config_path) {
    return roma::service::ConfigBundle(roma::service::ServiceConfig::load(config_path));
  }
  return roma::service::ConfigBundle(roma::service::ServiceConfig{});
}

Json parse_request(const char* text) {
  if (!text || !*text) return Json::object();
  return Json::parse(text);
}

bool null_arg(const void* p, char** out, roma_status* st, const char* what) {
  if (p) return false;
  *st = fail(ROMA_ERR_INVALID_ARGUMENT, std::string(what) + " is NULL", out);
  return true;
}

}  // namespace

extern "C" {

const char* roma_version(void) { return "1.0.0"; }

const char* roma_status_name(roma_status status) {
  if (status == ROMA_OK) return "Ok";
  if (status == ROMA_ERR_INTERNAL) return "Internal";
  int code = static_cast<int>(status) - 1;
  if (code < 0 || code > static_cast<int>(ErrorCode::kConfigError)) return "Unknown";
  return roma::error_code_name(static_cast<ErrorCode>(code));
}

const char* roma_last_error(void) { return g_last_error.c_str(); }

void roma_string_free(char* s) { std::free(s); }

roma_status roma_platform_open(const char* data_dir, const char* config_path, roma_platform** out) {
  if (!out) return fail(ROMA_ERR_INVALID_ARGUMENT, "out is NULL", nullptr);
  *out = nullptr;
  if (!data_dir || !*data_dir) return fail(ROMA_ERR_INVALID_ARGUMENT, "data_dir is empty", nullptr);
  return guarded(nullptr, [&] {
    auto p = std::make_unique<roma_platform>();
    p->service = std::make_unique<roma::service::Service>(data_dir, load_bundle(config_path));
    *out = p.release();
    return ROMA_OK;
  });
}

void roma_platform_close(roma_platform* platform) { delete platform; }

roma_status roma_platform_call(roma_platform* platform, const char* op, const char* request_json,
                               char** response_json) {
  roma_status st = ROMA_OK;
  if (null_arg(platform, response_json, &st, "platform") || null_arg(op, response_json, &st, "op")) return st;
  return guarded(response_json, [&] {
    Json result = platform->service->call(op, parse_request(request_json));
    put(response_json, result.dump());
    return ROMA_OK;
  });
}

int roma_is_mutating(const char* op) { return op && roma::service::Service::is_mutating(op) ? 1 : 0; }

int roma_platform_authorize(const roma_platform* platform, roma_scope scope, const char* team_id,
                            const char* member_id, const char* token) {
  if (!platform || !token) return 0;
  try {
    using Scope = roma::service::Service::Scope;
    Scope s = scope == ROMA_SCOPE_ADMIN ? Scope::kAdmin : scope == ROMA_SCOPE_LEAD ? Scope::kLead : Scope::kMember;
    return platform->service->authorize(s, team_id ? team_id : "", member_id ? member_id : "", token) ? 1 : 0;
  } catch (...) {
    return 0;
  }
}

roma_status roma_platform_config(const roma_platform* platform, char** config_json) {
  roma_status st = ROMA_OK;
  if (null_arg(platform, config_json, &st, "platform")) return st;
  return guarded(config_json, [&] {
    put(config_json, platform->service->bundle().config().to_json().dump());
    return ROMA_OK;
  });
}

roma_status roma_platform_snapshot(const roma_platform* platform, int replayed, char** state_json) {
  roma_status st = ROMA_OK;
  if (null_arg(platform, state_json, &st, "platform")) return st;
  return guarded(state_json, [&] {
    put(state_json, replayed ? platform->service->replay_snapshot() : platform->service->state_snapshot());
    return ROMA_OK;
  });
}

roma_status roma_score(const char* config_path, const char* request_json, char** out_json) {
  return guarded(out_json, [&] {
    auto bundle = load_bundle(config_path);
    put(out_json, roma::batch::score(bundle, parse_request(request_json)).dump());
    return ROMA_OK;
  });
}

roma_status roma_cluster(const char* cohort_text, size_t k_min, size_t k_max, size_t k, char** out_json) {
  roma_status st = ROMA_OK;
  if (null_arg(cohort_text, out_json, &st, "cohort_text")) return st;
  return guarded(out_json, [&] {
    std::optional<std::size_t> fixed;
    if (k) fixed = k;
    put(out_json, roma::batch::cluster(cohort_text, k_min, k_max, fixed).dump());
    return ROMA_OK;
  });
}

roma_status roma_recommend(const char* config_path, const char* request_json, char** out_json) {
  return guarded(out_json, [&] {
    auto bundle = load_bundle(config_path);
    put(out_json, roma::batch::recommend(bundle, parse_request(request_json)).dump());
    return ROMA_OK;
  });
}

roma_status roma_match(const char* config_path, const char* request_json, char** out_json) {
  return guarded(out_json, [&] {
    auto bundle = load_bundle(config_path);
    put(out_json, roma::batch::match(bundle, parse_request(request_json)).dump());
    return ROMA_OK;
  });
}

roma_status roma_verify_ledger(const char* ledger_path, char** out_json) {
  roma_status st = ROMA_OK;
  if (null_arg(ledger_path, out_json, &st, "ledger_path")) return st;
  return guarded(out_json, [&] {
    auto v = roma::ledger::verify_file(ledger_path);
    Json j{{"ok", v.ok},
           {"entries", v.entries},
           {"head", roma::crypto::to_hex(v.head)},
           {"first_bad_seq", v.first_bad_seq ? Json(*v.first_bad_seq) : Json(nullptr)},
           {"reason", v.reason}};
    put(out_json, j.dump());
    if (!v.ok) {
      g_last_error = v.reason;
      return ROMA_ERR_CHECKSUM_MISMATCH;
    }
    return ROMA_OK;
  });
}

roma_status roma_export_memos(const char* ledger_path, uint64_t from, uint64_t to, char** out_jsonl) {
  roma_status st = ROMA_OK;
  if (null_arg(ledger_path, out_jsonl, &st, "ledger_path")) return st;
  return guarded(out_jsonl, [&] {
    std::optional<std::uint64_t> upto;
    if (to) upto = to;
    put(out_jsonl, roma::ledger::export_memos(ledger_path, from, upto).to_jsonl());
    return ROMA_OK;
  });
}

}  // extern "C"
