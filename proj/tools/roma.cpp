// Command-line front end over the C API.
#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "roma/roma.h"

namespace {

using Json = nlohmann::json;

enum Exit { kOk = 0, kUsage = 1, kValidation = 2, kDomain = 3, kTampered = 4, kIo = 5 };

int exit_for(roma_status st) {
  switch (st) {
    case ROMA_OK: return kOk;
    case ROMA_ERR_INVALID_ARGUMENT:
    case ROMA_ERR_FORMAT:
    case ROMA_ERR_MISSING_ITEM:
    case ROMA_ERR_DUPLICATE_ITEM:
    case ROMA_ERR_UNKNOWN_ITEM:
    case ROMA_ERR_OUT_OF_SCALE_VALUE:
    case ROMA_ERR_UNKNOWN_INSTRUMENT:
    case ROMA_ERR_VALIDATION:
    case ROMA_ERR_CONFIG:
    case ROMA_ERR_UNKNOWN_ANCHOR:
      return kValidation;
    case ROMA_ERR_CHECKSUM_MISMATCH: return kTampered;
    case ROMA_ERR_STORAGE: return kIo;
    default: return kDomain;
  }
}

int http_status_for(roma_status st) {
  switch (st) {
    case ROMA_OK: return 200;
    case ROMA_ERR_INVALID_ARGUMENT:
    case ROMA_ERR_FORMAT: return 400;
    case ROMA_ERR_UNAUTHORIZED: return 401;
    case ROMA_ERR_NO_CONSENT:
    case ROMA_ERR_CONSENT_REVOKED:
    case ROMA_ERR_ANONYMITY_THRESHOLD: return 403;
    case ROMA_ERR_NOT_FOUND:
    case ROMA_ERR_UNKNOWN_INSTRUMENT:
    case ROMA_ERR_UNKNOWN_ANCHOR: return 404;
    case ROMA_ERR_CONFLICT:
    case ROMA_ERR_STALE_PROPOSAL:
    case ROMA_ERR_FORBIDDEN_PAIR_INTRODUCED:
    case ROMA_ERR_PROJECT_OPEN:
    case ROMA_ERR_INCOMPLETE_ASSESSMENTS:
    case ROMA_ERR_INFEASIBLE_MATCHING: return 409;
    case ROMA_ERR_STORAGE:
    case ROMA_ERR_CHECKSUM_MISMATCH:
    case ROMA_ERR_SERIALIZATION:
    case ROMA_ERR_INTERNAL: return 500;
    default: return 422;
  }
}

struct Owned {
  char* p = nullptr;
  ~Owned() { roma_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

std::optional<std::string> read_input(const std::string& path) {
  std::ostringstream ss;
  if (path == "-") {
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  ss << in.rdbuf();
  return ss.str();
}

int report_failure(roma_status st, const Owned& out) {
  std::cerr << "roma: " << roma_status_name(st) << ": " << roma_last_error() << "\n";
  (void)out;
  return exit_for(st);
}

int print_result(roma_status st, const Owned& out) {
  if (st != ROMA_OK) return report_failure(st, out);
  std::cout << Json::parse(out.str()).dump(2) << "\n";
  return kOk;
}

const char* opt_config(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

std::string default_data_dir() {
  if (const char* env = std::getenv("ROMA_DATA_DIR"); env && *env) return env;
  return "roma-data";
}

int missing_file(const std::string& path) {
  std::cerr << "roma: cannot read " << path << "\n";
  return kIo;
}

struct Platform {
  roma_platform* p = nullptr;
  ~Platform() { roma_platform_close(p); }
};

int open_platform(const std::string& dir, const std::string& config, Platform& out) {
  roma_status st = roma_platform_open(dir.c_str(), opt_config(config), &out.p);
  if (st != ROMA_OK) {
    std::cerr << "roma: cannot open " << dir << ": " << roma_status_name(st) << ": " << roma_last_error() << "\n";
    return exit_for(st);
  }
  return kOk;
}

// ---- HTTP ----------------------------------------------------------------

struct Route {
  const char* method;
  const char* pattern;
  const char* op;
  roma_scope scope;
};

// Path parameters are merged into the request body under these names.
const Route kRoutes[] = {
    {"POST", R"(/v1/teams)", "create_team", ROMA_SCOPE_ADMIN},
    {"GET", R"(/v1/teams/([^/]+))", "get_team", ROMA_SCOPE_LEAD},
    {"POST", R"(/v1/teams/([^/]+)/members)", "register_member", ROMA_SCOPE_LEAD},
    {"POST", R"(/v1/teams/([^/]+)/members/([^/]+)/consent)", "grant_consent", ROMA_SCOPE_MEMBER},
    {"DELETE", R"(/v1/teams/([^/]+)/members/([^/]+)/consent)", "revoke_consent", ROMA_SCOPE_MEMBER},
    {"POST", R"(/v1/teams/([^/]+)/members/([^/]+)/assessments)", "submit_assessment", ROMA_SCOPE_MEMBER},
    {"POST", R"(/v1/teams/([^/]+)/members/([^/]+)/pulses)", "submit_pulse", ROMA_SCOPE_MEMBER},
    {"GET", R"(/v1/teams/([^/]+)/members/([^/]+)/profile)", "get_profile", ROMA_SCOPE_MEMBER},
    {"POST", R"(/v1/teams/([^/]+)/recommendation)", "recommend", ROMA_SCOPE_LEAD},
    {"POST", R"(/v1/teams/([^/]+)/assignment)", "accept_or_adjust", ROMA_SCOPE_LEAD},
    {"POST", R"(/v1/teams/([^/]+)/reports/([^/]+))", "report", ROMA_SCOPE_LEAD},
    {"POST", R"(/v1/teams/([^/]+)/signals)", "signal", ROMA_SCOPE_LEAD},
    {"GET", R"(/v1/teams/([^/]+)/triggers)", "list_triggers", ROMA_SCOPE_LEAD},
    {"POST", R"(/v1/teams/([^/]+)/sprint)", "set_sprint", ROMA_SCOPE_LEAD},
    {"POST", R"(/v1/teams/([^/]+)/close)", "close_project", ROMA_SCOPE_LEAD},
    {"GET", R"(/v1/ledger/verify)", "verify", ROMA_SCOPE_ADMIN},
    {"GET", R"(/v1/ledger/memos)", "export_memos", ROMA_SCOPE_ADMIN},
};

Json query_value(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  if (!v.empty() && v.find_first_not_of("0123456789") == std::string::npos && v.size() < 19) {
    return std::stoll(v);
  }
  return v;
}

std::string bearer(const httplib::Request& req) {
  auto h = req.get_header_value("Authorization");
  const std::string prefix = "Bearer ";
  return h.rfind(prefix, 0) == 0 ? h.substr(prefix.size()) : std::string();
}

void send(httplib::Response& res, int status, const std::string& body) {
  res.status = status;
  res.set_content(body, "application/json");
}

void send_error(httplib::Response& res, roma_status st, const std::string& message) {
  Json err{{"error", {{"code", roma_status_name(st)}, {"message", message}}}};
  send(res, http_status_for(st), err.dump());
}

void handle(roma_platform* p, bool member_dashboard, const Route& route, const httplib::Request& req,
            httplib::Response& res) {
  Json body = Json::object();
  if (!req.body.empty()) {
    body = Json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
      send_error(res, ROMA_ERR_INVALID_ARGUMENT, "request body must be a JSON object");
      return;
    }
  }
  for (const auto& [k, v] : req.params) body[k] = query_value(v);
  std::string team = req.matches.size() > 1 ? req.matches[1].str() : "";
  std::string second = req.matches.size() > 2 ? req.matches[2].str() : "";
  std::string op = route.op;
  if (!team.empty()) body["team"] = team;
  if (op == "report") {
    body["kind"] = second;
  } else if (!second.empty()) {
    body["member"] = second;
  }

  std::string token = bearer(req);
  const char* member = body.contains("member") && body["member"].is_string()
                           ? body["member"].get_ref<const std::string&>().c_str()
                           : nullptr;
  bool allowed = roma_platform_authorize(p, route.scope, team.c_str(), member, token.c_str()) == 1;
  // Members may read the anonymized team trend when the deployment allows it.
  if (!allowed && member_dashboard && op == "report" && second == "SprintMotivationTrend" && member) {
    allowed = roma_platform_authorize(p, ROMA_SCOPE_MEMBER, team.c_str(), member, token.c_str()) == 1;
    body["anonymized"] = true;
  }
  if (!allowed) {
    send_error(res, ROMA_ERR_UNAUTHORIZED, "missing or invalid bearer token");
    return;
  }
  if (op == "create_team" && !body.contains("team")) {
    send_error(res, ROMA_ERR_INVALID_ARGUMENT, "request needs 'team'");
    return;
  }
  Owned out;
  roma_status st = roma_platform_call(p, op.c_str(), body.dump().c_str(), &out.p);
  if (st != ROMA_OK) {
    send(res, http_status_for(st), out.str());
    return;
  }
  int status = 200;
  if (op == "create_team" || op == "register_member") status = 201;
  send(res, status, out.str());
}

httplib::Server* g_server = nullptr;

void stop(int) {
  if (g_server) g_server->stop();
}

int serve(const std::string& dir, const std::string& config, const std::string& host, int port) {
  Platform platform;
  if (int rc = open_platform(dir, config, platform)) return rc;
  Owned cfg;
  roma_platform_config(platform.p, &cfg.p);
  bool member_dashboard = Json::parse(cfg.str()).value("member_team_dashboard", false);

  httplib::Server server;
  for (const auto& route : kRoutes) {
    auto h = [&, route](const httplib::Request& req, httplib::Response& res) {
      handle(platform.p, member_dashboard, route, req, res);
    };
    std::string m = route.method;
    if (m == "GET") server.Get(route.pattern, h);
    else if (m == "POST") server.Post(route.pattern, h);
    else server.Delete(route.pattern, h);
  }
  server.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
    send(res, 200, Json{{"status", "ok"}, {"version", roma_version()}}.dump());
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
    send_error(res, ROMA_ERR_INTERNAL, "internal error");
  });
  g_server = &server;
  std::signal(SIGINT, stop);
  std::signal(SIGTERM, stop);
  int bound = port;
  if (port == 0) {
    bound = server.bind_to_any_port(host);
  } else if (!server.bind_to_port(host, port)) {
    std::cerr << "roma: cannot bind " << host << ":" << port << "\n";
    return kIo;
  }
  std::cerr << "roma: serving " << dir << " on http://" << host << ":" << bound << "/v1/\n";
  std::cout << Json{{"listening", bound}}.dump() << std::endl;
  server.listen_after_bind();
  g_server = nullptr;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Role and motivation platform"};
  app.require_subcommand(1);
  std::string config;
  app.add_option("--config", config, "Config file (JSON)")->check(CLI::ExistingFile);

  std::string input;
  auto* score = app.add_subcommand("score", "Score assessment records (JSON object or array)");
  score->add_option("input", input, "Input file or -")->required();

  std::size_t k_min = 2, k_max = 6, k = 0;
  auto* cluster = app.add_subcommand("cluster", "Cluster a cohort file (member_id,O,C,E,A,N)");
  cluster->add_option("input", input, "Cohort file or -")->required();
  cluster->add_option("--k-min", k_min, "Smallest k considered");
  cluster->add_option("--k-max", k_max, "Largest k considered");
  cluster->add_option("--k", k, "Fixed k (skips selection)");

  auto* recommend = app.add_subcommand("recommend", "Role, AI-mode and pairing recommendation bundle");
  recommend->add_option("input", input, "Members file or -")->required();

  auto* match = app.add_subcommand("match", "Optimal pair assignment for a team");
  match->add_option("input", input, "Members file or -")->required();

  std::string data_dir = default_data_dir();
  std::string team, kind, format = "json", out_dir;
  std::optional<long long> from_t, to_t;
  bool anonymized = false;
  auto* report = app.add_subcommand("report", "Generate a process artifact from a data directory");
  report->add_option("--data-dir", data_dir, "Data directory (default $ROMA_DATA_DIR)");
  report->add_option("--team", team, "Team id")->required();
  report->add_option("--kind", kind, "Artifact kind, e.g. TeamCompositionMatrix")->required();
  report->add_option("--from", from_t, "Period start (unix seconds)");
  report->add_option("--to", to_t, "Period end, exclusive (unix seconds)");
  report->add_flag("--anonymized", anonymized, "Team-level view only");
  report->add_option("--format", format, "json or markdown")->check(CLI::IsMember({"json", "markdown"}));
  report->add_option("--out-dir", out_dir, "Also write <stem>.json and <stem>.md here");

  std::string ledger_path;
  auto* verify = app.add_subcommand("verify-ledger", "Verify a ledger file's hash chain");
  verify->add_option("ledger", ledger_path, "Ledger file (default <data-dir>/ledger.bin)");
  verify->add_option("--data-dir", data_dir, "Data directory (default $ROMA_DATA_DIR)");

  std::uint64_t seq_from = 1, seq_to = 0;
  auto* memos = app.add_subcommand("export-memos", "Export ledger entries as anchoring memos (JSONL)");
  memos->add_option("ledger", ledger_path, "Ledger file (default <data-dir>/ledger.bin)");
  memos->add_option("--data-dir", data_dir, "Data directory (default $ROMA_DATA_DIR)");
  memos->add_option("--from", seq_from, "First seq");
  memos->add_option("--to", seq_to, "Last seq (default head)");

  std::string op, request = "{}";
  auto* call = app.add_subcommand("call", "Run one platform operation against a data directory");
  call->add_option("op", op, "Operation name")->required();
  call->add_option("request", request, "Request JSON, @file or -");
  call->add_option("--data-dir", data_dir, "Data directory (default $ROMA_DATA_DIR)");

  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the /v1/ HTTP API");
  serve_cmd->add_option("--data-dir", data_dir, "Data directory (default $ROMA_DATA_DIR)");
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--port", port, "Port (0 picks a free one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  auto run_batch = [&](auto fn) {
    auto text = read_input(input);
    if (!text) return missing_file(input);
    Owned out;
    return print_result(fn(opt_config(config), text->c_str(), &out.p), out);
  };

  if (score->parsed()) return run_batch(roma_score);
  if (recommend->parsed()) return run_batch(roma_recommend);
  if (match->parsed()) return run_batch(roma_match);
  if (cluster->parsed()) {
    auto text = read_input(input);
    if (!text) return missing_file(input);
    Owned out;
    return print_result(roma_cluster(text->c_str(), k_min, k_max, k, &out.p), out);
  }
  if (verify->parsed() || memos->parsed()) {
    if (ledger_path.empty()) ledger_path = (std::filesystem::path(data_dir) / "ledger.bin").string();
    if (!std::filesystem::exists(ledger_path)) return missing_file(ledger_path);
    Owned out;
    if (verify->parsed()) {
      roma_status st = roma_verify_ledger(ledger_path.c_str(), &out.p);
      if (st != ROMA_OK && st != ROMA_ERR_CHECKSUM_MISMATCH) return report_failure(st, out);
      Json j = Json::parse(out.str());
      std::cout << j.dump(2) << "\n";
      if (st == ROMA_ERR_CHECKSUM_MISMATCH) {
        std::cerr << "roma: ledger tampered; first_bad_seq=" << j["first_bad_seq"].dump() << " ("
                  << j["reason"].get<std::string>() << ")\n";
      }
      return exit_for(st);
    }
    roma_status st = roma_export_memos(ledger_path.c_str(), seq_from, seq_to, &out.p);
    if (st != ROMA_OK) return report_failure(st, out);
    std::cout << out.str();
    return kOk;
  }
  if (serve_cmd->parsed()) return serve(data_dir, config, host, port);

  Platform platform;
  if (int rc = open_platform(data_dir, config, platform)) return rc;
  if (call->parsed()) {
    std::string text = request;
    if (request == "-" || (!request.empty() && request[0] == '@')) {
      auto r = read_input(request == "-" ? "-" : request.substr(1));
      if (!r) return missing_file(request.substr(1));
      text = *r;
    }
    Owned out;
    return print_result(roma_platform_call(platform.p, op.c_str(), text.c_str(), &out.p), out);
  }

  // report
  Json req{{"team", team}, {"kind", kind}, {"anonymized", anonymized}};
  if (from_t) req["from"] = *from_t;
  if (to_t) req["to"] = *to_t;
  Owned out;
  roma_status st = roma_platform_call(platform.p, "report", req.dump().c_str(), &out.p);
  if (st != ROMA_OK) return report_failure(st, out);
  Json res = Json::parse(out.str());
  for (const auto& a : res["artifacts"]) {
    std::string machine = a["artifact"].dump(2) + "\n";
    std::string md = a["markdown"].get<std::string>();
    std::cout << (format == "json" ? machine : md);
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      std::string stem = a["file_stem"].get<std::string>();
      std::ofstream(std::filesystem::path(out_dir) / (stem + ".json"), std::ios::binary) << machine;
      std::ofstream(std::filesystem::path(out_dir) / (stem + ".md"), std::ios::binary) << md;
    }
  }
  std::cerr << "roma: report recorded at seq " << res["seq"] << "\n";
  return kOk;
}
