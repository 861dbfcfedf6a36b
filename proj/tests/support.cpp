#include "support.hpp"

#include <sodium.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <sys/wait.h>

namespace roma::test {

TempDir::TempDir() {
  std::string tmpl = (std::filesystem::temp_directory_path() / "roma-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

crypto::Digest oracle_sha256(const std::string& bytes) {
  if (sodium_init() < 0) throw std::runtime_error("sodium_init failed");
  crypto::Digest d{};
  crypto_hash_sha256(d.data(), reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size());
  return d;
}

CommandResult run(const std::string& command) {
  TempDir dir;
  auto out_path = dir / "out";
  auto err_path = dir / "err";
  std::string full = command + " >" + out_path.string() + " 2>" + err_path.string();
  int status = std::system(full.c_str());
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out_path);
  r.err = read_file(err_path);
  return r;
}

bool matches_golden(const std::string& name, const std::string& actual) {
  std::filesystem::path p = std::filesystem::path(ROMA_GOLDEN_DIR) / name;
  const char* update = std::getenv("ROMA_UPDATE_GOLDEN");
  if (update && std::string(update) == "1") {
    write_file(p, actual);
    return true;
  }
  if (!std::filesystem::exists(p)) return false;
  return read_file(p) == actual;
}

const std::vector<CohortCluster>& reference_clusters() {
  static const std::vector<CohortCluster> kClusters = {
      {{4.24, 3.37, 2.91, 3.46, 2.20}, {0.54, 0.61, 0.79, 0.69, 0.65}, 15},
      {{2.89, 3.43, 3.71, 3.96, 1.98}, {0.79, 0.64, 0.60, 0.37, 0.59}, 14},
      {{2.99, 3.14, 2.02, 3.30, 3.92}, {0.79, 0.62, 0.46, 0.52, 0.62}, 11},
  };
  return kClusters;
}

std::vector<TraitVector> sample_reference_cohort(std::mt19937_64& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<TraitVector> out;
  for (const auto& c : reference_clusters()) {
    for (std::size_t i = 0; i < c.size; ++i) {
      TraitVector v{};
      for (std::size_t t = 0; t < kTraitCount; ++t) {
        v[t] = std::clamp(c.centroid[t] + c.sd[t] * unit(rng), 1.0, 5.0);
      }
      out.push_back(v);
    }
  }
  return out;
}

ZVector random_z(std::mt19937_64& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  ZVector z{};
  for (auto& v : z) v = unit(rng);
  return z;
}

std::vector<SessionSample> simulate_sessions(std::mt19937_64& rng,
                                             const role_model::RoleEffectModel& model,
                                             std::size_t members, std::size_t sessions,
                                             double residual_sd) {
  std::normal_distribution<double> noise(0.0, residual_sd);
  std::uniform_int_distribution<int> pick(0, 2);
  std::vector<SessionSample> out;
  out.reserve(members * sessions);
  for (std::size_t m = 0; m < members; ++m) {
    ZVector z = random_z(rng);
    for (std::size_t s = 0; s < sessions; ++s) {
      auto role = static_cast<role_model::Role>(pick(rng));
      // Hand-expanded additive model, not score_roles.
      double v = model.base(role);
      for (auto t : kAllTraits) v += model.moderation(t, role) * z[index(t)];
      out.push_back({role, v + noise(rng)});
    }
  }
  return out;
}

namespace {

void enumerate(const std::vector<std::size_t>& pool, std::vector<bool>& used, std::size_t pos,
               std::size_t pairs, int score,
               const std::function<bool(std::size_t, std::size_t)>& allowed,
               const std::function<int(std::size_t, std::size_t)>& value, BruteForceOptimum& best) {
  while (pos < pool.size() && used[pos]) ++pos;
  if (pos >= pool.size()) {
    if (pairs > best.pairs || (pairs == best.pairs && score > best.score)) best = {pairs, score};
    return;
  }
  used[pos] = true;
  // Leave pool[pos] unmatched.
  enumerate(pool, used, pos + 1, pairs, score, allowed, value, best);
  for (std::size_t j = pos + 1; j < pool.size(); ++j) {
    if (used[j] || !allowed(pool[pos], pool[j])) continue;
    used[j] = true;
    enumerate(pool, used, pos + 1, pairs + 1, score + value(pool[pos], pool[j]), allowed, value, best);
    used[j] = false;
  }
  used[pos] = false;
}

BruteForceOptimum best_over(const std::vector<std::size_t>& pool,
                            const std::function<bool(std::size_t, std::size_t)>& allowed,
                            const std::function<int(std::size_t, std::size_t)>& value) {
  BruteForceOptimum best{0, std::numeric_limits<int>::min()};
  std::vector<bool> used(pool.size(), false);
  enumerate(pool, used, 0, 0, 0, allowed, value, best);
  return best;
}

}  // namespace

BruteForceOptimum brute_force_matching(const std::vector<pairing::TeamMember>& members,
                                       const pairing::PairingWeights& weights) {
  const std::size_t n = members.size();
  std::vector<std::vector<pairing::PairScore>> s(n, std::vector<pairing::PairScore>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) s[i][j] = pairing::pair_score(members[i], members[j], weights);
  }
  auto allowed = [&](std::size_t i, std::size_t j) { return !s[i][j].forbidden(); };
  auto value = [&](std::size_t i, std::size_t j) { return s[i][j].score; };

  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  std::vector<std::size_t> pool = all;
  if (n % 2 == 1) {
    std::size_t pick = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (members[i].solo_score > members[pick].solo_score) pick = i;
    }
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  auto best = best_over(pool, allowed, value);
  if (best.pairs == 0 && pool.size() != n) best = best_over(all, allowed, value);
  return best;
}

psychometrics::MotivationSample imi_sample(double normalized, Timestamp at, const std::string& member) {
  psychometrics::MotivationSample s;
  s.member_id = member;
  s.instrument = psychometrics::InstrumentKind::kImiIe;
  s.normalized = normalized;
  s.raw_score = 1.0 + 6.0 * normalized;
  s.taken_at = at;
  return s;
}

}  // namespace roma::test
