#include "roma/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "roma/error.hpp"

namespace roma::clustering {

double euclidean(const TraitVector& a, const TraitVector& b) noexcept {
  double sum = 0.0;
  for (std::size_t t = 0; t < kTraitCount; ++t) {
    double d = a[t] - b[t];
    sum += d * d;
  }
  return std::sqrt(sum);
}

DistanceMatrix pairwise_distances(std::span<const TraitVector> points) {
  if (points.size() < 2) {
    throw Error(ErrorCode::kTooFewProfiles, "at least two profiles are required");
  }
  DistanceMatrix d(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      d.set(i, j, euclidean(points[i], points[j]));
    }
  }
  return d;
}

DistanceMatrix pairwise_distances(std::span<const psychometrics::PersonalityProfile> profiles) {
  std::vector<TraitVector> points;
  points.reserve(profiles.size());
  for (const auto& p : profiles) points.push_back(p.traits);
  return pairwise_distances(points);
}

Dendrogram agglomerate(const DistanceMatrix& distances) {
  const std::size_t n = distances.size();
  if (n < 2) throw Error(ErrorCode::kTooFewProfiles, "at least two points are required");

  struct Active {
    std::size_t node;
    std::size_t min_leaf;
    std::size_t size;
  };
  // Active clusters kept sorted by min_leaf; dist is indexed by slot and
  // tracks complete-linkage distance (max over member pairs).
  std::vector<Active> active(n);
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    active[i] = {i, i, 1};
    for (std::size_t j = 0; j < n; ++j) dist[i][j] = distances(i, j);
  }
  std::vector<std::size_t> slot(n);
  std::iota(slot.begin(), slot.end(), 0);  // active index -> dist row

  Dendrogram out;
  out.leaves = n;
  std::vector<std::pair<std::size_t, std::size_t>> children;
  children.reserve(n - 1);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t best_a = 0, best_b = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        double d = dist[slot[a]][slot[b]];
        if (d < best) {
          best = d;
          best_a = a;
          best_b = b;
        }
      }
    }
    const Active& left = active[best_a];
    const Active& right = active[best_b];
    Merge m{left.node, right.node, best, left.size + right.size};
    out.merges.push_back(m);
    children.emplace_back(left.node, right.node);

    // Merged cluster reuses best_a's row; complete linkage takes the max.
    std::size_t row_a = slot[best_a];
    std::size_t row_b = slot[best_b];
    for (std::size_t c = 0; c < active.size(); ++c) {
      if (c == best_a || c == best_b) continue;
      std::size_t row_c = slot[c];
      double d = std::max(dist[row_a][row_c], dist[row_b][row_c]);
      dist[row_a][row_c] = d;
      dist[row_c][row_a] = d;
    }
    active[best_a] = {n + step, left.min_leaf, m.size};
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
    slot.erase(slot.begin() + static_cast<std::ptrdiff_t>(best_b));
  }

  // Left-first traversal from the root.
  std::vector<std::size_t> stack{2 * n - 2};
  while (!stack.empty()) {
    std::size_t node = stack.back();
    stack.pop_back();
    if (node < n) {
      out.leaf_order.push_back(node);
    } else {
      const auto& [l, r] = children[node - n];
      stack.push_back(r);
      stack.push_back(l);
    }
  }
  return out;
}

Hierarchy build_hierarchy(std::vector<TraitVector> points) {
  Hierarchy h;
  h.distances = pairwise_distances(points);
  h.dendrogram = agglomerate(h.distances);
  h.points = std::move(points);
  return h;
}

namespace {

std::vector<std::size_t> flat_assignment(const Dendrogram& dg, std::size_t k) {
  const std::size_t n = dg.leaves;
  std::vector<std::size_t> parent(2 * n - 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n - k; ++i) {
    const auto& m = dg.merges[i];
    parent[find(m.left)] = n + i;
    parent[find(m.right)] = n + i;
  }
  // Relabel roots in order of first appearance over leaves 0..n-1.
  std::vector<std::size_t> label(2 * n - 1, std::numeric_limits<std::size_t>::max());
  std::vector<std::size_t> out(n);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t root = find(i);
    if (label[root] == std::numeric_limits<std::size_t>::max()) label[root] = next++;
    out[i] = label[root];
  }
  return out;
}

}  // namespace

double dunn_index(const DistanceMatrix& d, std::span<const std::size_t> assignment,
                  std::size_t k, bool* degenerate) {
  double min_between = std::numeric_limits<double>::infinity();
  double max_diameter = 0.0;
  const std::size_t n = assignment.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (assignment[i] == assignment[j]) {
        max_diameter = std::max(max_diameter, d(i, j));
      } else {
        min_between = std::min(min_between, d(i, j));
      }
    }
  }
  if (k < 2 || !std::isfinite(min_between)) {
    throw Error(ErrorCode::kInvalidK, "Dunn index needs at least two clusters");
  }
  bool degen = max_diameter == 0.0;
  if (degenerate != nullptr) *degenerate = degen;
  return min_between / (degen ? kDegenerateDiameter : max_diameter);
}

ClusterModel cut_and_score(const Hierarchy& h, std::size_t k,
                           const psychometrics::TraitNorms& norms) {
  const std::size_t n = h.dendrogram.leaves;
  if (k < 2 || k + 1 > n) {
    throw Error(ErrorCode::kInvalidK,
                "k must lie in [2, " + std::to_string(n > 0 ? n - 1 : 0) + "], got " +
                    std::to_string(k));
  }
  ClusterModel model;
  model.k = k;
  model.assignment = flat_assignment(h.dendrogram, k);
  model.sizes.assign(k, 0);
  model.centroids.assign(k, TraitVector{});
  model.sds.assign(k, TraitVector{});
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = model.assignment[i];
    model.sizes[c] += 1;
    for (std::size_t t = 0; t < kTraitCount; ++t) model.centroids[c][t] += h.points[i][t];
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t t = 0; t < kTraitCount; ++t) {
      model.centroids[c][t] /= static_cast<double>(model.sizes[c]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = model.assignment[i];
    for (std::size_t t = 0; t < kTraitCount; ++t) {
      double dv = h.points[i][t] - model.centroids[c][t];
      model.sds[c][t] += dv * dv;
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t t = 0; t < kTraitCount; ++t) {
      model.sds[c][t] = model.sizes[c] > 1
                            ? std::sqrt(model.sds[c][t] / static_cast<double>(model.sizes[c] - 1))
                            : 0.0;
    }
    auto profile = psychometrics::PersonalityProfile{model.centroids[c],
                                                     psychometrics::ProfileSource::kManual, 0};
    model.labels.push_back(
        role_model::classify_archetype(psychometrics::zscore_profile(profile, norms)));
  }
  model.dunn_index = dunn_index(h.distances, model.assignment, k, &model.degenerate_dunn);
  return model;
}

ClusterModel select_k(const Hierarchy& h, std::size_t k_min, std::size_t k_max,
                      const psychometrics::TraitNorms& norms) {
  if (k_min > k_max) throw Error(ErrorCode::kInvalidK, "empty k range");
  ClusterModel best = cut_and_score(h, k_min, norms);
  for (std::size_t k = k_min + 1; k <= k_max; ++k) {
    ClusterModel candidate = cut_and_score(h, k, norms);
    if (candidate.dunn_index > best.dunn_index) best = std::move(candidate);
  }
  return best;
}

Classification classify(const TraitVector& profile, const ClusterModel& model) {
  if (model.centroids.empty()) throw Error(ErrorCode::kEmptyModel, "cluster model is empty");
  Classification out;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < model.centroids.size(); ++c) {
    double d = euclidean(profile, model.centroids[c]);
    if (d < best) {
      best = d;
      out.cluster = c;
    }
  }
  out.label = model.labels.size() == model.centroids.size() ? model.labels[out.cluster]
                                                            : role_model::ArchetypeKind::kAdapter;
  return out;
}

Cohort parse_cohort(std::string_view text) {
  Cohort cohort;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string line(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') {
      if (nl == text.size()) break;
      continue;
    }
    char delim = ',';
    if (line.find(',') == std::string::npos) {
      delim = line.find(';') != std::string::npos ? ';' : '\t';
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, delim)) {
      auto b = cell.find_first_not_of(" \t");
      auto e = cell.find_last_not_of(" \t");
      cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (cells.size() != 1 + kTraitCount) {
      throw Error(ErrorCode::kFormatError, "cohort line " + std::to_string(line_no) +
                                               ": expected member_id and 5 trait columns");
    }
    TraitVector v{};
    bool numeric = true;
    for (std::size_t t = 0; t < kTraitCount; ++t) {
      try {
        std::size_t used = 0;
        v[t] = std::stod(cells[1 + t], &used);
        if (used != cells[1 + t].size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (cohort.member_ids.empty() && line_no == 1) continue;  // header row
      throw Error(ErrorCode::kFormatError,
                  "cohort line " + std::to_string(line_no) + ": non-numeric trait value");
    }
    psychometrics::PersonalityProfile::manual(v);  // range check
    cohort.member_ids.push_back(cells[0]);
    cohort.traits.push_back(v);
    if (nl == text.size()) break;
  }
  return cohort;
}

}  // namespace roma::clustering
