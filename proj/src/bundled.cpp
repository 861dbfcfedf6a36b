#include "roma/bundled.hpp"

#include <map>
#include <mutex>
#include <string>

#include "roma/error.hpp"

namespace roma::bundled {
namespace detail {
extern const std::pair<std::string_view, std::string_view> kFiles[];
extern const std::size_t kFileCount;
}  // namespace detail

namespace {

constexpr std::string_view kInstrumentDir = "instruments/";
constexpr std::string_view kInstrumentExt = ".inst";

}  // namespace

std::string_view file(std::string_view path) {
  for (std::size_t i = 0; i < detail::kFileCount; ++i) {
    if (detail::kFiles[i].first == path) return detail::kFiles[i].second;
  }
  throw Error(ErrorCode::kNotFound, "no bundled file " + std::string(path));
}

std::vector<std::string_view> file_names() {
  std::vector<std::string_view> out;
  for (std::size_t i = 0; i < detail::kFileCount; ++i) out.push_back(detail::kFiles[i].first);
  return out;
}

std::vector<std::string_view> instrument_names() {
  std::vector<std::string_view> out;
  for (auto name : file_names()) {
    if (name.starts_with(kInstrumentDir) && name.ends_with(kInstrumentExt)) {
      name.remove_prefix(kInstrumentDir.size());
      name.remove_suffix(kInstrumentExt.size());
      out.push_back(name);
    }
  }
  return out;
}

const psychometrics::InstrumentDefinition& instrument(std::string_view name) {
  static std::mutex mu;
  static std::map<std::string, psychometrics::InstrumentDefinition, std::less<>> cache;
  std::lock_guard lock(mu);
  if (auto it = cache.find(name); it != cache.end()) return it->second;
  std::string path = std::string(kInstrumentDir) + std::string(name) + std::string(kInstrumentExt);
  std::string_view text;
  try {
    text = file(path);
  } catch (const Error&) {
    throw Error(ErrorCode::kUnknownInstrument, "unknown instrument '" + std::string(name) + "'");
  }
  auto [it, _] = cache.emplace(std::string(name), psychometrics::InstrumentDefinition::parse(text));
  return it->second;
}

const role_model::RoleEffectModel& effect_model() {
  static const role_model::RoleEffectModel model =
      role_model::RoleEffectModel::parse(file("effect_model.txt"));
  return model;
}

}  // namespace roma::bundled
