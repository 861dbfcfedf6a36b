#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roma/psychometrics.hpp"
#include "roma/role_model.hpp"
#include "roma/traits.hpp"

namespace roma::clustering {

// Dense symmetric matrix of Euclidean distances over raw (1-5) traits.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return d_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) noexcept {
    d_[i * n_ + j] = v;
    d_[j * n_ + i] = v;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
};

double euclidean(const TraitVector& a, const TraitVector& b) noexcept;

// Throws Error(kTooFewProfiles) for fewer than two points.
DistanceMatrix pairwise_distances(std::span<const TraitVector> points);
DistanceMatrix pairwise_distances(std::span<const psychometrics::PersonalityProfile> profiles);

// Node ids follow the usual convention: leaves are 0..n-1 and the node
// created by merge i is n + i. `left` is the child holding the smaller leaf.
struct Merge {
  std::size_t left = 0;
  std::size_t right = 0;
  double height = 0.0;
  std::size_t size = 0;
};

struct Dendrogram {
  std::size_t leaves = 0;
  std::vector<Merge> merges;          // exactly leaves - 1, heights non-decreasing
  std::vector<std::size_t> leaf_order;  // left-first traversal of the root
};

// Complete linkage. Ties between equal candidate distances are broken toward
// the pair whose smallest member leaves are lexicographically smallest.
Dendrogram agglomerate(const DistanceMatrix& distances);

// Points, their distances and the dendrogram built over them.
struct Hierarchy {
  std::vector<TraitVector> points;
  DistanceMatrix distances;
  Dendrogram dendrogram;
};

Hierarchy build_hierarchy(std::vector<TraitVector> points);

inline constexpr double kDegenerateDiameter = 1e-9;

struct ClusterModel {
  std::size_t k = 0;
  std::vector<TraitVector> centroids;
  std::vector<TraitVector> sds;  // sample SD per trait (0 for singletons)
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> assignment;  // point -> cluster id
  // Archetype of each centroid, derived via the trait-threshold rules.
  std::vector<role_model::ArchetypeKind> labels;
  double dunn_index = 0.0;
  // Set when the largest cluster diameter was 0 and replaced by 1e-9.
  bool degenerate_dunn = false;
};

// Cluster ids are ordered by each cluster's smallest member index.
// Throws Error(kInvalidK) unless 2 <= k <= n - 1.
ClusterModel cut_and_score(const Hierarchy& h, std::size_t k,
                           const psychometrics::TraitNorms& norms =
                               psychometrics::TraitNorms::reference());

// Dunn index of an arbitrary flat partition; exposed for tests.
double dunn_index(const DistanceMatrix& d, std::span<const std::size_t> assignment,
                  std::size_t k, bool* degenerate = nullptr);

// Maximizes the Dunn index over [k_min, k_max]; ties go to the smaller k.
ClusterModel select_k(const Hierarchy& h, std::size_t k_min, std::size_t k_max,
                      const psychometrics::TraitNorms& norms =
                          psychometrics::TraitNorms::reference());

struct Classification {
  std::size_t cluster = 0;
  role_model::ArchetypeKind label = role_model::ArchetypeKind::kAdapter;
};

// Nearest centroid; ties go to the lowest cluster id. Throws Error(kEmptyModel).
Classification classify(const TraitVector& profile, const ClusterModel& model);

// Cohort import: delimited text, header optional, columns
// member_id,O,C,E,A,N. Delimiter is ',' or ';' or tab.
struct Cohort {
  std::vector<std::string> member_ids;
  std::vector<TraitVector> traits;
};

Cohort parse_cohort(std::string_view text);

}  // namespace roma::clustering
