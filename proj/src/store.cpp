#include "store.hpp"

#include <sqlite3.h>

#include "roma/error.hpp"

namespace roma::service {
namespace {

[[noreturn]] void fail(sqlite3* db, const std::string& what) {
  throw Error(ErrorCode::kStorageFailure, what + ": " + (db ? sqlite3_errmsg(db) : "no database"));
}

class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) fail(db, "prepare");
  }
  ~Statement() { sqlite3_finalize(stmt_); }

  Statement& bind(int i, const std::string& v) {
    sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Statement& bind_null(int i) {
    sqlite3_bind_null(stmt_, i);
    return *this;
  }
  bool step() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    fail(db_, "step");
  }
  std::optional<std::string> text(int col) const {
    if (sqlite3_column_type(stmt_, col) == SQLITE_NULL) return std::nullopt;
    const auto* p = reinterpret_cast<const char*>(sqlite3_column_blob(stmt_, col));
    return std::string(p ? p : "", static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)));
  }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

}  // namespace

Store::Store(const std::filesystem::path& path) {
  if (sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                      nullptr) != SQLITE_OK) {
    std::string msg = "cannot open store " + path.string();
    sqlite3_close(db_);
    db_ = nullptr;
    throw Error(ErrorCode::kStorageFailure, msg);
  }
  exec("PRAGMA journal_mode=WAL");
  exec("PRAGMA synchronous=FULL");
  exec("CREATE TABLE IF NOT EXISTS kv (key TEXT PRIMARY KEY, value BLOB NOT NULL)");
  exec(
      "CREATE TABLE IF NOT EXISTS directory ("
      " subject TEXT PRIMARY KEY, member_id TEXT NOT NULL UNIQUE,"
      " team_id TEXT NOT NULL, display_name TEXT)");
}

Store::~Store() { sqlite3_close(db_); }

void Store::exec(const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw Error(ErrorCode::kStorageFailure, std::string("store: ") + msg);
  }
}

std::optional<std::string> Store::get(const std::string& key) const {
  Statement s(db_, "SELECT value FROM kv WHERE key = ?1");
  s.bind(1, key);
  if (!s.step()) return std::nullopt;
  return s.text(0);
}

void Store::put(const std::string& key, const std::string& value) {
  Statement s(db_, "INSERT INTO kv(key, value) VALUES(?1, ?2) ON CONFLICT(key) DO UPDATE SET value = ?2");
  s.bind(1, key).bind(2, value);
  s.step();
}

void Store::put_state(const std::string& state, std::uint64_t applied_seq) {
  exec("BEGIN IMMEDIATE");
  try {
    put("state", state);
    put("applied_seq", std::to_string(applied_seq));
    exec("COMMIT");
  } catch (...) {
    sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
    throw;
  }
}

std::uint64_t Store::applied_seq() const {
  auto v = get("applied_seq");
  return v ? std::stoull(*v) : 0;
}

void Store::directory_put(const DirectoryRow& row) {
  Statement s(db_,
              "INSERT INTO directory(subject, member_id, team_id, display_name) VALUES(?1, ?2, ?3, ?4)"
              " ON CONFLICT(subject) DO UPDATE SET team_id = ?3, display_name = ?4");
  s.bind(1, row.subject).bind(2, row.member_id).bind(3, row.team_id);
  if (row.display_name) s.bind(4, *row.display_name);
  else s.bind_null(4);
  s.step();
}

std::optional<DirectoryRow> Store::directory_by_subject(const std::string& subject) const {
  Statement s(db_, "SELECT subject, member_id, team_id, display_name FROM directory WHERE subject = ?1");
  s.bind(1, subject);
  if (!s.step()) return std::nullopt;
  return DirectoryRow{*s.text(0), *s.text(1), *s.text(2), s.text(3)};
}

void Store::directory_tombstone(const std::string& subject) {
  Statement s(db_, "UPDATE directory SET display_name = NULL WHERE subject = ?1");
  s.bind(1, subject);
  s.step();
}

}  // namespace roma::service
