// Acceptance runner: one PASS/FAIL line per criterion.
#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "roma/bundled.hpp"
#include "roma/clustering.hpp"
#include "roma/error.hpp"
#include "roma/ledger.hpp"
#include "roma/monitor.hpp"
#include "roma/pairing.hpp"
#include "roma/role_model.hpp"
#include "roma/service.hpp"
#include "roma/stats.hpp"
#include "support.hpp"

using namespace roma;
using role_model::Role;
using Json = nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(digits);
  ss << v;
  return ss.str();
}

bool close_rel(double a, double b, double rel = 1e-8) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

// ---- cluster recovery ------------------------------------------------------

Outcome cluster_recovery() {
  const auto& ref = test::reference_clusters();
  auto start = std::chrono::steady_clock::now();
  int chose_three = 0, recovered = 0;
  for (int run = 0; run < 100; ++run) {
    std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(run));
    auto h = clustering::build_hierarchy(test::sample_reference_cohort(rng));
    auto model = clustering::select_k(h, 2, 6);
    if (model.k != 3) continue;
    ++chose_three;
    std::array<std::size_t, 3> perm{0, 1, 2};
    bool matched = false;
    do {
      bool all = true;
      for (std::size_t c = 0; c < 3 && all; ++c) {
        for (std::size_t t = 0; t < kTraitCount; ++t) {
          if (std::abs(model.centroids[perm[c]][t] - ref[c].centroid[t]) > 0.3) all = false;
        }
      }
      matched |= all;
    } while (!matched && std::next_permutation(perm.begin(), perm.end()));
    if (matched) ++recovered;
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {chose_three >= 90 && recovered >= 90 && secs < 10.0,
          "k=3 in " + std::to_string(chose_three) + "/100 (need 90), centroids within 0.3 in " +
              std::to_string(recovered) + "/100 (need 90), " + fmt(secs, 2) + " s"};
}

// ---- role hierarchy --------------------------------------------------------

Outcome role_hierarchy() {
  const auto& model = bundled::effect_model();
  int significant = 0;
  double d_resid_sum = 0.0, d_pooled_sum = 0.0;
  const int runs = 200;
  for (int run = 0; run < runs; ++run) {
    std::mt19937_64 rng(5000 + static_cast<std::uint64_t>(run));
    auto sessions = test::simulate_sessions(rng, model, 66, 12);
    stats::GroupedSamples groups{{"Pilot", {}}, {"Navigator", {}}, {"Solo", {}}};
    for (const auto& s : sessions) groups[static_cast<std::size_t>(s.role)].second.push_back(s.motivation);
    if (stats::one_way_anova(groups).p_value < 0.01) ++significant;
    d_resid_sum += stats::cohens_d(groups[0].second, groups[2].second, test::kResidualSd);
    d_pooled_sum += stats::cohens_d(groups[0].second, groups[2].second);
  }
  double d = d_resid_sum / runs;
  bool pass = significant >= 190 && std::abs(d - 0.576) <= 0.15;
  return {pass, "ANOVA p<0.01 in " + std::to_string(significant) + "/200 (need 190), mean d(Pilot-Solo) " + fmt(d) +
                    " with residual SD (target 0.576 +- 0.15); pooled-SD d " + fmt(d_pooled_sum / runs)};
}

// ---- alignment benefit -----------------------------------------------------

// E[max_r score_r(z)] for z ~ N(0, I) by tensor quadrature over the 3-D
// Gaussian of role scores.
double expected_max_score(const role_model::RoleEffectModel& model) {
  std::array<std::array<double, kTraitCount>, 3> m{};
  std::array<double, 3> b{};
  for (std::size_t r = 0; r < 3; ++r) {
    b[r] = model.base(static_cast<Role>(r));
    for (auto t : kAllTraits) m[r][index(t)] = model.moderation(t, static_cast<Role>(r));
  }
  double cov[3][3];
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      cov[i][j] = 0.0;
      for (std::size_t t = 0; t < kTraitCount; ++t) cov[i][j] += m[i][t] * m[j][t];
    }
  }
  double l[3][3] = {};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = cov[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      l[i][j] = i == j ? std::sqrt(s) : s / l[j][j];
    }
  }
  const int n = 201;
  const double lim = 8.0, h = 2.0 * lim / (n - 1);
  std::vector<double> x(n), w(n);
  double wsum = 0.0;
  for (int i = 0; i < n; ++i) {
    x[i] = -lim + h * i;
    w[i] = std::exp(-0.5 * x[i] * x[i]);
    wsum += w[i];
  }
  for (auto& v : w) v /= wsum;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        double u[3] = {x[i], x[j], x[k]};
        double best = -1e300;
        for (std::size_t r = 0; r < 3; ++r) {
          double s = b[r];
          for (std::size_t c = 0; c <= r; ++c) s += l[r][c] * u[c];
          best = std::max(best, s);
        }
        total += w[i] * w[j] * w[k] * best;
      }
    }
  }
  return total;
}

Outcome alignment_benefit() {
  const auto& model = bundled::effect_model();
  double base_mean = (model.base(Role::kPilot) + model.base(Role::kNavigator) + model.base(Role::kSolo)) / 3.0;
  double expected = expected_max_score(model) - base_mean;
  int wins = 0;
  double uplift_sum = 0.0;
  for (int run = 0; run < 100; ++run) {
    std::mt19937_64 rng(9000 + static_cast<std::uint64_t>(run));
    std::normal_distribution<double> noise(0.0, test::kResidualSd);
    std::uniform_int_distribution<int> pick(0, 2);
    double aligned = 0.0, random = 0.0;
    std::size_t count = 0;
    for (int member = 0; member < 66; ++member) {
      ZVector z = test::random_z(rng);
      Role best = role_model::score_roles(z, model).ranked.front();
      auto simulate = [&](Role r) {
        double v = model.base(r);
        for (auto t : kAllTraits) v += model.moderation(t, r) * z[index(t)];
        return v + noise(rng);
      };
      for (int s = 0; s < 12; ++s) {
        aligned += simulate(best);
        random += simulate(static_cast<Role>(pick(rng)));
        ++count;
      }
    }
    double uplift = (aligned - random) / static_cast<double>(count);
    if (uplift > 0.0) ++wins;
    uplift_sum += uplift;
  }
  double mean_uplift = uplift_sum / 100.0;
  bool pass = wins >= 99 && std::abs(mean_uplift - expected) <= 0.3 * expected;
  return {pass, "aligned > random in " + std::to_string(wins) + "/100 (need 99), mean uplift " + fmt(mean_uplift) +
                    " vs expected " + fmt(expected) + " (+-30%)"};
}

// ---- chi-squared and textbook fixtures -------------------------------------

Outcome chi_squared_fixture() {
  auto r = stats::chi_squared_independence({{11, 5, 1}, {3, 6, 2}, {2, 3, 6}});
  bool chi_ok = std::abs(r.statistic - 17.01) <= 0.5;
  bool p_ok = std::abs(r.p_value - 0.0126) <= 0.003;

  bool textbook = true;
  stats::GroupedSamples g{{"a", {1, 2, 3}}, {"b", {2, 3, 4}}, {"c", {3, 4, 5}}};
  auto a = stats::one_way_anova(g);
  textbook &= close_rel(a.statistic, 3.0) && close_rel(a.p_value, 0.125);
  stats::GroupedSamples sep{{"a", {1, 2, 3}}, {"b", {4, 5, 6}}, {"c", {7, 8, 9}}};
  auto kw = stats::kruskal_wallis(sep);
  textbook &= close_rel(kw.statistic, 7.2) && close_rel(kw.p_value, std::exp(-3.6));
  auto c2 = stats::chi_squared_independence({{10, 20, 30}, {20, 20, 20}});
  double c2_expected = 2.0 * (25.0 / 15.0 + 1.0);
  textbook &= close_rel(c2.statistic, c2_expected) && close_rel(c2.p_value, std::exp(-c2_expected / 2.0));
  std::vector<double> x{1, 2, 3}, y{2, 3, 4};
  textbook &= close_rel(stats::cohens_d(x, y), -1.0);
  std::vector<double> t1{1, 3}, t2{4, 6};
  auto t = stats::student_t(t1, t2);
  double tv = 3.0 / std::sqrt(2.0);
  textbook &= close_rel(t.statistic, -tv) && close_rel(t.p_value, 1.0 - tv / std::sqrt(2.0 + tv * tv));

  return {chi_ok && p_ok && textbook,
          "chi2 " + fmt(r.statistic, 3) + " (target 17.01 +- 0.5: " + (chi_ok ? "ok" : "miss") + "), p " +
              fmt(r.p_value, 5) + " (target 0.0126 +- 0.003: " + (p_ok ? "ok" : "miss") + "), df " + fmt(r.df1, 0) +
              ", textbook fixtures " + (textbook ? "ok" : "miss")};
}

// ---- matching optimality ---------------------------------------------------

Outcome matching_optimality() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> size(2, 8);
  const auto& model = bundled::effect_model();
  int equal = 0, forbidden = 0, infeasible_agree = 0;
  const int teams = 500;
  for (int rep = 0; rep < teams; ++rep) {
    std::size_t n = size(rng);
    std::vector<pairing::TeamMember> team;
    for (std::size_t i = 0; i < n; ++i) {
      auto z = test::random_z(rng);
      team.push_back({"m" + std::to_string(i), role_model::classify_archetype(z), z,
                      role_model::score_roles(z, model).score(Role::kSolo)});
    }
    auto oracle = test::brute_force_matching(team, pairing::PairingWeights{});
    if (oracle.pairs == 0) {
      try {
        pairing::match_team(team);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kInfeasibleMatching) ++infeasible_agree, ++equal;
      }
      continue;
    }
    auto r = pairing::match_team(team);
    if (r.pairs.size() == oracle.pairs && r.total_score == oracle.score) ++equal;
    for (const auto& [p, q] : r.pairs) {
      auto i = std::stoul(p.substr(1)), j = std::stoul(q.substr(1));
      if (pairing::pair_score(team[i], team[j]).forbidden()) ++forbidden;
    }
  }
  return {equal == teams && forbidden == 0,
          std::to_string(equal) + "/" + std::to_string(teams) + " equal to brute force (" +
              std::to_string(infeasible_agree) + " infeasible in both), " + std::to_string(forbidden) +
              " forbidden pairs"};
}

// ---- trigger correctness ---------------------------------------------------

Outcome trigger_correctness() {
  monitor::Baseline b;
  b.member_id = "m1";
  b.imi = 0.8;
  b.imi_sd = 0.1;
  monitor::MonitorConfig cfg;  // delta = 0.5 * SD = 0.05
  auto series = [](std::initializer_list<double> values) {
    std::vector<psychometrics::MotivationSample> out;
    int w = 1;
    for (double v : values) {
      // Two pulses per week averaging to v.
      Timestamp week = test::kMonday + w++ * 7 * test::kDay;
      out.push_back(test::imi_sample(v - 0.01, week + 9 * 3600));
      out.push_back(test::imi_sample(v + 0.01, week + 3 * test::kDay));
    }
    return out;
  };
  struct Case {
    const char* name;
    std::vector<psychometrics::MotivationSample> samples;
    std::vector<std::string> expected_ids;
  };
  auto week_label = [](int w) { return monitor::iso_week(test::kMonday + w * 7 * test::kDay).label(); };
  std::vector<Case> cases{
      {"stable", series({0.8, 0.82, 0.79, 0.81, 0.8, 0.78}), {}},
      {"two-week dip", series({0.8, 0.81, 0.7, 0.69}), {"ImiBelowBaseline2Weeks:m1:" + week_label(4)}},
      {"non-consecutive dips", series({0.8, 0.7, 0.8, 0.7, 0.8, 0.7}), {}},
      {"recovered dip", series({0.7, 0.7, 0.85}), {}},
      {"boundary is not below", series({0.75, 0.75}), {}},
  };
  int correct = 0, idempotent = 0;
  std::string misses;
  for (auto& c : cases) {
    auto first = monitor::evaluate_triggers("m1", &b, c.samples, cfg);
    std::vector<std::string> ids;
    for (const auto& e : first) ids.push_back(e.id());
    if (ids == c.expected_ids) {
      ++correct;
    } else {
      misses += std::string(" ") + c.name;
    }
    bool same = true;
    for (int again = 0; again < 3; ++again) {
      auto shuffled = c.samples;
      std::mt19937_64 rng(static_cast<std::uint64_t>(again));
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      auto rerun = monitor::evaluate_triggers("m1", &b, shuffled, cfg);
      same &= rerun.size() == first.size();
      for (std::size_t i = 0; same && i < rerun.size(); ++i) same &= rerun[i].id() == first[i].id();
    }
    if (same) ++idempotent;
  }
  auto n = static_cast<int>(cases.size());
  return {correct == n && idempotent == n,
          std::to_string(correct) + "/" + std::to_string(n) + " series give the expected trigger sets, " +
              std::to_string(idempotent) + "/" + std::to_string(n) + " idempotent on re-run" +
              (misses.empty() ? "" : "; wrong:" + misses)};
}

// ---- ledger integrity ------------------------------------------------------

struct RecordSpan {
  std::uint64_t seq;
  std::size_t begin, end;
};

std::vector<RecordSpan> record_spans(const std::string& bytes) {
  std::vector<RecordSpan> out;
  std::size_t pos = 16;
  std::uint64_t seq = 1;
  while (pos + 4 <= bytes.size()) {
    std::size_t len = 0;
    for (int i = 3; i >= 0; --i) len = (len << 8) | static_cast<unsigned char>(bytes[pos + static_cast<std::size_t>(i)]);
    out.push_back({seq++, pos, pos + 4 + len});
    pos += 4 + len;
  }
  return out;
}

Outcome ledger_integrity() {
  test::TempDir dir;
  auto path = dir / "ledger.bin";
  {
    ledger::Ledger l(path);
    for (int i = 0; i < 10000; ++i) {
      Json data{{"i", i}};
      // Every 500th entry is large enough to need several memos.
      if (i % 500 == 0) data["blob"] = std::string(1400, static_cast<char>('a' + i / 500 % 26)) + "\xc3\xa9";
      l.append("test.event", 1700000000 + i, data);
    }
  }
  auto clean = ledger::verify_file(path);
  bool ok10k = clean.ok && clean.entries == 10000;

  std::string original = test::read_file(path);
  auto spans = record_spans(original);
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<std::size_t> byte(16, original.size() - 1);
  std::uniform_int_distribution<int> bit(0, 7);
  int detected = 0;
  for (int m = 0; m < 100; ++m) {
    std::size_t off = byte(rng);
    auto it = std::upper_bound(spans.begin(), spans.end(), off,
                               [](std::size_t o, const RecordSpan& s) { return o < s.end; });
    std::string mutated = original;
    mutated[off] = static_cast<char>(mutated[off] ^ (1 << bit(rng)));
    test::write_file(path, mutated);
    auto v = ledger::verify_file(path);
    if (!v.ok && v.first_bad_seq && *v.first_bad_seq == it->seq) ++detected;
  }
  test::write_file(path, original);

  bool memos_ok = true;
  auto ex = ledger::export_memos(path, 1, 1001);
  auto text = ex.to_jsonl();
  auto back = ledger::AnchorExport::from_jsonl(text);
  memos_ok &= back.to_jsonl() == text && back.entries.size() == 1001;
  auto entries = ledger::Ledger(path).entries(1, 1001);
  std::size_t multi = 0;
  for (std::size_t i = 0; i < back.entries.size() && memos_ok; ++i) {
    const auto& e = back.entries[i];
    if (e.memos.size() > 1) ++multi;
    auto r = ledger::reassemble(e.memos);
    memos_ok &= r.payload == entries[i].payload && r.chain_digest == entries[i].chain_digest;
  }
  memos_ok &= multi == 3;

  return {ok10k && detected == 100 && memos_ok,
          std::string("10000-entry ledger ") + (ok10k ? "verifies" : "FAILS") + ", " + std::to_string(detected) +
              "/100 bit flips located at the mutated seq, memo round trip " + (memos_ok ? "byte-exact" : "broken") +
              " (" + std::to_string(multi) + " multi-memo entries)"};
}

// ---- event-sourced recovery ------------------------------------------------

service::ServiceConfig fixed_config() {
  service::ServiceConfig c;
  c.salt = "acceptance-salt";
  c.token_secret = "acceptance-token-secret";
  return c;
}

Json bfi(int o, int c, int e, int a, int n) {
  return Json{{"1", 6 - e}, {"6", e}, {"2", a}, {"7", 6 - a}, {"3", 6 - c},
              {"8", c},     {"4", 6 - n}, {"9", n}, {"5", 6 - o}, {"10", o}};
}

Json imi(int v) {
  Json r = Json::object();
  for (int i = 1; i <= 7; ++i) r[std::to_string(i)] = v;
  return r;
}

// A workload touching every event kind; `stop_after` limits the number of
// operations run.
using Op = std::pair<std::string, Json>;

std::vector<Op> workload() {
  std::vector<Op> ops;
  const std::vector<std::pair<std::string, Json>> members{
      {"ana", bfi(5, 3, 3, 3, 3)}, {"ben", bfi(3, 3, 4, 4, 3)}, {"cai", bfi(3, 3, 2, 3, 4)},
      {"dee", bfi(3, 4, 3, 3, 3)}, {"eve", bfi(3, 3, 3, 3, 3)}};
  ops.push_back({"create_team", {{"team", "t1"}}});
  for (const auto& [m, r] : members) {
    ops.push_back({"register_member", {{"team", "t1"}, {"member", m}, {"display_name", "Member " + m}}});
    ops.push_back({"grant_consent", {{"team", "t1"}, {"member", m}}});
    ops.push_back({"submit_assessment", {{"team", "t1"}, {"member", m}, {"instrument", "bfi10"}, {"responses", r}}});
  }
  ops.push_back({"recommend", {{"team", "t1"}}});
  ops.push_back({"accept_or_adjust", {{"team", "t1"}, {"proposal_version", 1}, {"actor", "lead"}}});
  ops.push_back({"set_sprint", {{"team", "t1"}, {"sprint", "S1"}}});
  for (int w = 0; w < 4; ++w) {
    for (const auto& [m, r] : members) {
      int v = m == "ana" && w >= 2 ? 2 : 5;
      for (int k = 0; k < 2; ++k) {
        ops.push_back({"submit_pulse",
                       {{"team", "t1"},
                        {"member", m},
                        {"responses", imi(v)},
                        {"role_context", "Pilot"},
                        {"at", test::kMonday + w * 7 * test::kDay + k * 2 * test::kDay + 3600}}});
      }
    }
  }
  ops.push_back({"signal", {{"team", "t1"}, {"kind", "VelocityDecline"}, {"note", "velocity down"}}});
  ops.push_back({"revoke_consent", {{"team", "t1"}, {"member", "eve"}}});
  ops.push_back({"report", {{"team", "t1"}, {"kind", "TeamCompositionMatrix"}}});
  return ops;
}

service::ServiceOptions fixed_clock() {
  service::ServiceOptions o;
  o.clock = [] { return test::kMonday + 40 * test::kDay; };
  return o;
}

Outcome event_sourced_recovery() {
  auto ops = workload();
  std::vector<std::string> problems;

  // Store lost after a clean run.
  test::TempDir a;
  std::string before;
  std::uint64_t entries = 0;
  {
    service::Service s(a.path(), service::ConfigBundle(fixed_config()), fixed_clock());
    for (const auto& [op, req] : ops) s.call(op, req);
    before = s.state_snapshot();
    entries = s.ledger().size();
  }
  std::filesystem::remove(a / "store.db");
  {
    service::Service s(a.path(), service::ConfigBundle(fixed_config()), fixed_clock());
    if (s.replayed_on_open() != entries) problems.push_back("replay count");
    if (s.state_snapshot() != before) problems.push_back("rebuilt state differs after store loss");
  }

  // Crash between ledger append and store write at several points. The
  // ledger prefix written before the crash must replay into the store
  // snapshot taken just before it, and the reopened store must match a full
  // replay that includes the crashed operation.
  int crash_points = 0, crash_ok = 0;
  for (std::size_t cut : {std::size_t{3}, ops.size() / 2, ops.size() - 1}) {
    test::TempDir crash_dir, prefix_dir;
    std::string pre_crash;
    std::uintmax_t prefix_bytes = 0;
    std::uint64_t crash_seq = 0;
    {
      auto opts = fixed_clock();
      opts.after_append = [&](std::uint64_t seq) {
        if (seq == crash_seq) throw service::InjectedCrash();
      };
      service::Service s(crash_dir.path(), service::ConfigBundle(fixed_config()), opts);
      for (std::size_t i = 0; i < cut; ++i) s.call(ops[i].first, ops[i].second);
      pre_crash = s.state_snapshot();
      prefix_bytes = std::filesystem::file_size(crash_dir / "ledger.bin");
      crash_seq = s.ledger().size() + 1;
      try {
        s.call(ops[cut].first, ops[cut].second);
      } catch (const service::InjectedCrash&) {
      }
    }
    ++crash_points;
    std::filesystem::copy_file(crash_dir / "ledger.bin", prefix_dir / "ledger.bin");
    std::filesystem::resize_file(prefix_dir / "ledger.bin", prefix_bytes);
    bool prefix_ok =
        service::Service(prefix_dir.path(), service::ConfigBundle(fixed_config()), fixed_clock()).state_snapshot() ==
        pre_crash;
    service::Service reopened(crash_dir.path(), service::ConfigBundle(fixed_config()), fixed_clock());
    bool recovered = reopened.replayed_on_open() == 1 && reopened.applied_seq() == crash_seq &&
                     reopened.state_snapshot() == reopened.replay_snapshot() &&
                     reopened.state_snapshot() != pre_crash;
    if (prefix_ok && recovered) ++crash_ok;
  }
  if (crash_ok != crash_points) problems.push_back("crash recovery differs");

  std::string detail = std::to_string(entries) + " entries replayed into a byte-identical snapshot; " +
                       std::to_string(crash_ok) + "/" + std::to_string(crash_points) + " crash points recovered";
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

// ---- primary only ----------------------------------------------------------

Outcome primary_only() {
  std::string cli = std::string("'") + ROMA_CLI + "'";
  auto fixture = [](const char* name) {
    return "'" + (std::filesystem::path(ROMA_FIXTURE_DIR) / name).string() + "'";
  };
  test::TempDir dir;
  std::string data = "'" + (dir.path() / "data").string() + "'";
  std::vector<std::pair<std::string, int>> steps{
      {cli + " cluster " + fixture("cohort_shrunk.csv"), 0},
      {cli + " score " + fixture("assessments.json"), 0},
      {cli + " recommend " + fixture("team.json"), 0},
      {cli + " call create_team '{\"team\":\"t1\"}' --data-dir " + data, 0},
      {cli + " verify-ledger --data-dir " + data, 0},
  };
  int ok = 0;
  for (const auto& [cmd, code] : steps) {
    if (test::run(cmd).exit_code == code) ++ok;
  }
  auto n = static_cast<int>(steps.size());
  return {ok == n, std::to_string(ok) + "/" + std::to_string(n) +
                       " CLI steps succeed with only the core library, CLI and tests built"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"cluster_recovery", cluster_recovery},
      {"role_hierarchy", role_hierarchy},
      {"alignment_benefit", alignment_benefit},
      {"chi_squared_fixture", chi_squared_fixture},
      {"matching_optimality", matching_optimality},
      {"trigger_correctness", trigger_correctness},
      {"ledger_integrity", ledger_integrity},
      {"event_sourced_recovery", event_sourced_recovery},
      {"primary_only", primary_only},
  };
  CLI::App app{"Acceptance checks"};
  std::string only;
  app.add_option("--only", only, "Run a single criterion");
  CLI11_PARSE(app, argc, argv);

  int failures = 0, ran = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && name != only) continue;
    ++ran;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    if (!o.pass) ++failures;
  }
  if (ran == 0) {
    std::cerr << "unknown criterion: " << only << "\n";
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
