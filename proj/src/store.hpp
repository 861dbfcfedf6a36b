#pragma once

#include <filesystem>
#include <optional>
#include <string>

struct sqlite3;

namespace roma::service {

struct DirectoryRow {
  std::string subject;
  std::string member_id;
  std::string team_id;
  std::optional<std::string> display_name;  // nullopt once tombstoned
};

// Single-file SQLite store: derived state, secrets and the off-chain member
// directory.
class Store {
 public:
  explicit Store(const std::filesystem::path& path);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& value);

  // Writes state and applied_seq in one transaction.
  void put_state(const std::string& state, std::uint64_t applied_seq);
  std::uint64_t applied_seq() const;

  void directory_put(const DirectoryRow& row);
  std::optional<DirectoryRow> directory_by_subject(const std::string& subject) const;
  void directory_tombstone(const std::string& subject);

 private:
  void exec(const char* sql);
  sqlite3* db_ = nullptr;
};

}  // namespace roma::service
