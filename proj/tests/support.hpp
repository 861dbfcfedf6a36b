#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "roma/crypto.hpp"
#include "roma/pairing.hpp"
#include "roma/psychometrics.hpp"
#include "roma/role_model.hpp"
#include "roma/traits.hpp"

namespace roma::test {

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& content);

// SHA-256 from libsodium, independent of the OpenSSL-backed implementation.
crypto::Digest oracle_sha256(const std::string& bytes);

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs `command` through the shell, capturing stdout and stderr.
CommandResult run(const std::string& command);

// Compares `actual` with golden/<name>; ROMA_UPDATE_GOLDEN=1 rewrites it.
bool matches_golden(const std::string& name, const std::string& actual);

// ---- three-archetype reference cohort ----

struct CohortCluster {
  TraitVector centroid;
  TraitVector sd;
  std::size_t size;
};

const std::vector<CohortCluster>& reference_clusters();

// Gaussian draws around each centroid, clamped to [1, 5], grouped by
// cluster in reference order.
std::vector<TraitVector> sample_reference_cohort(std::mt19937_64& rng);

// ---- role sessions ----

inline constexpr double kResidualSd = 0.894;

struct SessionSample {
  role_model::Role role;
  double motivation;
};

// members x sessions draws of base + moderation(z) + N(0, residual_sd)
// with z ~ N(0, I) per member and a uniformly random role per session.
std::vector<SessionSample> simulate_sessions(std::mt19937_64& rng,
                                             const role_model::RoleEffectModel& model,
                                             std::size_t members, std::size_t sessions,
                                             double residual_sd = kResidualSd);

ZVector random_z(std::mt19937_64& rng);

// ---- matching oracle ----

struct BruteForceOptimum {
  std::size_t pairs = 0;
  int score = 0;
};

// Enumerates every matching of the allowed-pair graph.
BruteForceOptimum brute_force_matching(const std::vector<pairing::TeamMember>& members,
                                       const pairing::PairingWeights& weights);

// ---- instruments ----

// Sample with given normalized value and timestamp.
psychometrics::MotivationSample imi_sample(double normalized, Timestamp at,
                                           const std::string& member = "m1");

inline constexpr Timestamp kDay = 86400;
// Monday 2026-01-05 00:00 UTC (ISO week 2026-W02).
inline constexpr Timestamp kMonday = 1767571200;

}  // namespace roma::test
