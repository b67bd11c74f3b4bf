#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gesturemap/embeddings.hpp"
#include "gesturemap/normalizer.hpp"

namespace gesturemap {

/// Disjoint cover of a phrase-id universe. Members of each cluster are sorted
/// and clusters are ordered by their smallest member.
struct Partition {
  std::vector<std::vector<std::string>> clusters;
  double theta = 0.0;

  std::size_t size() const noexcept { return clusters.size(); }
  std::vector<std::string> universe() const;
  /// Index of the cluster holding `id`, or npos.
  std::size_t cluster_of(const std::string& id) const;
  bool together(const std::string& a, const std::string& b) const;

  /// Sorts members and clusters into canonical order; throws on overlap or empty clusters.
  void canonicalize();

  friend bool operator==(const Partition& a, const Partition& b) { return a.clusters == b.clusters; }
};

constexpr double kDefaultTheta = 0.4;

/// Average-linkage agglomerative clustering under cosine distance. Merges the
/// closest pair while its distance is below `theta`; theta >= 2 merges everything.
/// Ties go to the lexicographically smallest pair of cluster representatives.
Partition cluster(const std::vector<PhraseVector>& vectors, double theta = kDefaultTheta);

struct PartitionScore {
  double purity = 0.0;
  double adjusted_rand = 0.0;
  /// confusion[g][p] = |gold cluster g ∩ predicted cluster p|
  std::vector<std::vector<std::size_t>> confusion;
};

PartitionScore score(const Partition& predicted, const Partition& gold);

/// Curation-import document: clusters with member ids and phrase texts.
nlohmann::json export_partition(const Partition& partition, const std::vector<RawPhrase>& corpus);
Partition import_partition(const nlohmann::json& doc);

}  // namespace gesturemap
