#include "roma/pairing.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "roma/error.hpp"

namespace roma::pairing {
namespace {

using role_model::ArchetypeKind;

bool is_pair(ArchetypeKind a, ArchetypeKind b, ArchetypeKind x, ArchetypeKind y) {
  return (a == x && b == y) || (a == y && b == x);
}

double z_of(const TeamMember& m, Trait t) { return m.z[index(t)]; }

struct Objective {
  int pairs = 0;
  int score = 0;
  bool operator>(const Objective& o) const {
    return pairs != o.pairs ? pairs > o.pairs : score > o.score;
  }
};

// Exact search over subsets of `idx` (at most kExactMatchLimit members).
std::vector<std::pair<std::size_t, std::size_t>> exact_match(
    const std::vector<std::size_t>& idx, const PairTable& table) {
  const std::size_t m = idx.size();
  const std::size_t full = (std::size_t{1} << m) - 1;
  std::vector<Objective> best(full + 1);
  std::vector<int> choice(full + 1, -1);  // partner slot, or -1 = unpaired
  for (std::size_t mask = 1; mask <= full; ++mask) {
    std::size_t i = static_cast<std::size_t>(__builtin_ctzll(mask));
    std::size_t rest = mask & ~(std::size_t{1} << i);
    Objective top;
    int top_choice = -2;
    for (std::size_t j = i + 1; j < m; ++j) {
      if (!(rest & (std::size_t{1} << j))) continue;
      if (!table.allowed(idx[i], idx[j])) continue;
      const Objective& sub = best[rest & ~(std::size_t{1} << j)];
      Objective cand{sub.pairs + 1, sub.score + table.at(idx[i], idx[j]).score};
      if (top_choice == -2 || cand > top) {
        top = cand;
        top_choice = static_cast<int>(j);
      }
    }
    if (top_choice == -2 || best[rest] > top) {
      top = best[rest];
      top_choice = -1;
    }
    best[mask] = top;
    choice[mask] = top_choice;
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t mask = full;
  while (mask != 0) {
    std::size_t i = static_cast<std::size_t>(__builtin_ctzll(mask));
    int partner = choice[mask];
    mask &= ~(std::size_t{1} << i);
    if (partner >= 0) {
      mask &= ~(std::size_t{1} << partner);
      out.emplace_back(idx[i], idx[static_cast<std::size_t>(partner)]);
    }
  }
  return out;
}

// Greedy by score, then augmenting and 2-opt improvement passes.
std::vector<std::pair<std::size_t, std::size_t>> heuristic_match(
    const std::vector<std::size_t>& idx, const PairTable& table) {
  struct Cand {
    int score;
    std::size_t a, b;
  };
  std::vector<Cand> cands;
  for (std::size_t x = 0; x < idx.size(); ++x) {
    for (std::size_t y = x + 1; y < idx.size(); ++y) {
      if (table.allowed(idx[x], idx[y])) {
        cands.push_back({table.at(idx[x], idx[y]).score, idx[x], idx[y]});
      }
    }
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Cand& l, const Cand& r) { return l.score > r.score; });
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<bool> used(table.size(), false);
  for (const auto& c : cands) {
    if (!used[c.a] && !used[c.b]) {
      used[c.a] = used[c.b] = true;
      pairs.emplace_back(c.a, c.b);
    }
  }
  auto score = [&](std::size_t a, std::size_t b) { return table.at(a, b).score; };
  auto ok = [&](std::size_t a, std::size_t b) { return table.allowed(a, b); };

  for (int round = 0; round < 1000; ++round) {
    bool improved = false;
    std::vector<std::size_t> free;
    for (std::size_t i : idx) {
      if (!used[i]) free.push_back(i);
    }
    // Augment: two free members can each take one side of an existing pair.
    for (std::size_t fu = 0; fu < free.size() && !improved; ++fu) {
      for (std::size_t fv = fu + 1; fv < free.size() && !improved; ++fv) {
        std::size_t u = free[fu], v = free[fv];
        if (ok(u, v)) {
          pairs.emplace_back(u, v);
          used[u] = used[v] = true;
          improved = true;
          break;
        }
        for (auto& p : pairs) {
          auto [a, b] = p;
          if (ok(u, a) && ok(v, b)) {
            p = {u, a};
            pairs.emplace_back(v, b);
          } else if (ok(u, b) && ok(v, a)) {
            p = {u, b};
            pairs.emplace_back(v, a);
          } else {
            continue;
          }
          used[u] = used[v] = true;
          improved = true;
          break;
        }
      }
    }
    if (improved) continue;
    // 2-opt on score between two pairs.
    for (std::size_t p = 0; p < pairs.size() && !improved; ++p) {
      for (std::size_t q = p + 1; q < pairs.size() && !improved; ++q) {
        auto [a, b] = pairs[p];
        auto [c, d] = pairs[q];
        int now = score(a, b) + score(c, d);
        if (ok(a, c) && ok(b, d) && score(a, c) + score(b, d) > now) {
          pairs[p] = {a, c};
          pairs[q] = {b, d};
          improved = true;
        } else if (ok(a, d) && ok(b, c) && score(a, d) + score(b, c) > now) {
          pairs[p] = {a, d};
          pairs[q] = {b, c};
          improved = true;
        }
      }
    }
    // Swap a paired member for a free one when it raises the score.
    for (std::size_t p = 0; p < pairs.size() && !improved; ++p) {
      for (std::size_t u : free) {
        auto [a, b] = pairs[p];
        int now = score(a, b);
        if (ok(a, u) && score(a, u) > now) {
          pairs[p] = {a, u};
          used[b] = false;
          used[u] = true;
          improved = true;
          break;
        }
        if (ok(b, u) && score(b, u) > now) {
          pairs[p] = {b, u};
          used[a] = false;
          used[u] = true;
          improved = true;
          break;
        }
      }
    }
    if (!improved) break;
  }
  for (auto& p : pairs) {
    if (p.first > p.second) std::swap(p.first, p.second);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

std::vector<std::pair<std::size_t, std::size_t>> best_matching(
    const std::vector<std::size_t>& idx, const PairTable& table) {
  return idx.size() <= kExactMatchLimit ? exact_match(idx, table)
                                        : heuristic_match(idx, table);
}

}  // namespace

PairScore pair_score(const TeamMember& a, const TeamMember& b, const PairingWeights& w) {
  if (!a.archetype || !b.archetype) {
    throw Error(ErrorCode::kUnclassifiedMember,
                "member " + (!a.archetype ? a.id : b.id) + " has no archetype");
  }
  PairScore ps;
  ps.member_a = a.id;
  ps.member_b = b.id;
  ps.archetype_a = *a.archetype;
  ps.archetype_b = *b.archetype;
  const ArchetypeKind x = *a.archetype;
  const ArchetypeKind y = *b.archetype;

  struct Rule {
    ArchetypeKind p, q;
    const char* tag;
  };
  static constexpr Rule kSynergies[] = {
      {ArchetypeKind::kExplorer, ArchetypeKind::kArchitect, "synergy:explorer+architect"},
      {ArchetypeKind::kOrchestrator, ArchetypeKind::kCraftsperson,
       "synergy:orchestrator+craftsperson"},
      {ArchetypeKind::kExplorer, ArchetypeKind::kOrchestrator, "synergy:explorer+orchestrator"},
      {ArchetypeKind::kArchitect, ArchetypeKind::kCraftsperson, "synergy:architect+craftsperson"},
  };
  for (const auto& r : kSynergies) {
    if (is_pair(x, y, r.p, r.q)) {
      ps.score += w.synergy;
      ps.flags |= static_cast<unsigned>(PairFlag::kSynergy);
      ps.rationale.emplace_back(r.tag);
    }
  }
  if (x == ArchetypeKind::kAdapter || y == ArchetypeKind::kAdapter) {
    ps.score += w.synergy;
    ps.flags |= static_cast<unsigned>(PairFlag::kSynergy);
    ps.rationale.emplace_back("synergy:adapter+any");
  }
  if (x == y && x == ArchetypeKind::kExplorer) {
    ps.score += w.caution;
    ps.flags |= static_cast<unsigned>(PairFlag::kCaution);
    ps.rationale.emplace_back("caution:explorer+explorer");
  }
  if (x == y && x == ArchetypeKind::kCraftsperson) {
    ps.score += w.caution;
    ps.flags |= static_cast<unsigned>(PairFlag::kCaution);
    ps.rationale.emplace_back("caution:craftsperson+craftsperson");
  }

  const double h = w.high_threshold;
  const bool a_high_n = z_of(a, Trait::kNeuroticism) >= h;
  const bool b_high_n = z_of(b, Trait::kNeuroticism) >= h;
  const bool a_low_a = z_of(a, Trait::kAgreeableness) <= -h;
  const bool b_low_a = z_of(b, Trait::kAgreeableness) <= -h;
  std::vector<const char*> risks;
  if (a_high_n && b_high_n) risks.push_back("high-neuroticism-pair");
  if ((a_low_a && b_high_n) || (b_low_a && a_high_n)) {
    risks.push_back("low-agreeableness-with-high-neuroticism");
  }
  for (const char* risk : risks) {
    if (w.hard_constraints) {
      ps.flags |= static_cast<unsigned>(PairFlag::kForbidden);
      ps.rationale.push_back(std::string("forbidden:") + risk);
    } else {
      ps.score += w.softened_penalty;
      ps.flags |= static_cast<unsigned>(PairFlag::kCaution);
      ps.rationale.push_back(std::string("softened:") + risk);
    }
  }
  return ps;
}

PairTable::PairTable(std::span<const TeamMember> members, const PairingWeights& weights)
    : n_(members.size()), scores_(members.size() * members.size()) {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      scores_[i * n_ + j] = pair_score(members[i], members[j], weights);
    }
  }
}

void PairTable::exclude(std::size_t i, std::size_t j) {
  auto& ps = i < j ? scores_[i * n_ + j] : scores_[j * n_ + i];
  ps.flags |= static_cast<unsigned>(PairFlag::kForbidden);
  ps.rationale.emplace_back("excluded:reconfiguration");
}

TeamAssignment match_team(std::span<const TeamMember> members, const PairingWeights& weights) {
  if (members.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "matching needs at least two members");
  }
  PairTable table(members, weights);
  return match_team(members, table);
}

TeamAssignment match_team(std::span<const TeamMember> members, const PairTable& table) {
  const std::size_t n = members.size();
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "matching needs at least two members");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::optional<std::size_t> solo;
  if (n % 2 == 1) {
    std::size_t pick = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (members[i].solo_score > members[pick].solo_score) pick = i;
    }
    solo = pick;
    idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  auto pairs = best_matching(idx, table);
  if (pairs.empty() && solo) {
    // The designated solo member may be the only feasible partner.
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    pairs = best_matching(all, table);
  }
  if (pairs.empty()) {
    throw Error(ErrorCode::kInfeasibleMatching, "constraints forbid every pairing in the team");
  }

  TeamAssignment out;
  std::vector<bool> used(n, false);
  std::sort(pairs.begin(), pairs.end());
  for (auto [a, b] : pairs) {
    out.pairs.emplace_back(members[a].id, members[b].id);
    out.total_score += table.at(a, b).score;
    used[a] = used[b] = true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!used[i]) out.unpaired.push_back(members[i].id);
  }
  return out;
}

std::string explain_pair(const PairScore& pair) {
  std::ostringstream out;
  out << pair.member_a << " (" << role_model::archetype_name(pair.archetype_a) << ") + "
      << pair.member_b << " (" << role_model::archetype_name(pair.archetype_b) << "): ";
  std::vector<std::string> parts;
  for (const auto& tag : pair.rationale) {
    if (tag == "synergy:explorer+architect") {
      parts.emplace_back(
          "exploration/evaluation division: the Explorer generates options while the "
          "Architect judges feasibility");
    } else if (tag == "synergy:orchestrator+craftsperson") {
      parts.emplace_back(
          "social buffering: the Orchestrator handles communication so the Craftsperson "
          "can stay on deep technical work");
    } else if (tag == "synergy:explorer+orchestrator") {
      parts.emplace_back(
          "dialogue gives shape to ideas: the Orchestrator articulates what the Explorer "
          "proposes");
    } else if (tag == "synergy:architect+craftsperson") {
      parts.emplace_back(
          "layered quality checks: system-wide and implementation-level reviews catch "
          "different errors");
    } else if (tag == "synergy:adapter+any") {
      parts.emplace_back(
          "flexible catalyst: the Adapter adjusts style and feedback to the partner");
    } else if (tag == "caution:explorer+explorer") {
      parts.emplace_back("caution: two Explorers risk ideation without implementation");
    } else if (tag == "caution:craftsperson+craftsperson") {
      parts.emplace_back("caution: two Craftspeople may amplify anxiety and talk less");
    } else if (tag.starts_with("forbidden:high-neuroticism-pair") ||
               tag.starts_with("softened:high-neuroticism-pair")) {
      parts.emplace_back("not recommended: two high-neuroticism members amplify stress");
    } else if (tag.ends_with("low-agreeableness-with-high-neuroticism")) {
      parts.emplace_back(
          "not recommended: low agreeableness paired with high neuroticism strains the "
          "partnership");
    } else if (tag == "excluded:reconfiguration") {
      parts.emplace_back("excluded while reconfiguring pairs");
    }
  }
  if (parts.empty()) {
    out << "no listed synergy or caution";
  } else {
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i > 0) out << "; ";
      out << parts[i];
    }
  }
  out << " (score " << pair.score << ")";
  return out.str();
}

}  // namespace roma::pairing
