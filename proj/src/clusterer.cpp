#include "gesturemap/clusterer.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "gesturemap/error.hpp"

namespace gesturemap {

std::vector<std::string> Partition::universe() const {
  std::vector<std::string> out;
  for (const auto& c : clusters) out.insert(out.end(), c.begin(), c.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t Partition::cluster_of(const std::string& id) const {
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (std::binary_search(clusters[i].begin(), clusters[i].end(), id)) return i;
  }
  return static_cast<std::size_t>(-1);
}

bool Partition::together(const std::string& a, const std::string& b) const {
  const auto ca = cluster_of(a);
  return ca != static_cast<std::size_t>(-1) && ca == cluster_of(b);
}

void Partition::canonicalize() {
  std::set<std::string> seen;
  for (auto& c : clusters) {
    if (c.empty()) throw Error(ErrorCode::InvalidInput, "partition contains an empty cluster");
    std::sort(c.begin(), c.end());
    for (const auto& id : c) {
      if (!seen.insert(id).second) throw Error(ErrorCode::InvalidInput, "id '" + id + "' appears in two clusters");
    }
  }
  std::sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

Partition cluster(const std::vector<PhraseVector>& vectors, double theta) {
  if (vectors.empty()) throw Error(ErrorCode::EmptyInput, "cannot cluster an empty set of phrase vectors");
  if (!(theta >= 0.0)) throw Error(ErrorCode::OutOfRange, "theta must be >= 0");

  // Work in id order so the result does not depend on input order.
  std::vector<const PhraseVector*> items;
  items.reserve(vectors.size());
  for (const auto& v : vectors) items.push_back(&v);
  std::sort(items.begin(), items.end(), [](auto* a, auto* b) { return a->source_id < b->source_id; });
  for (std::size_t i = 1; i < items.size(); ++i) {
    if (items[i]->source_id == items[i - 1]->source_id) {
      throw Error(ErrorCode::InvalidInput, "duplicate phrase id '" + items[i]->source_id + "'");
    }
  }
  const std::size_t dim = items.front()->v.size();
  for (auto* item : items) {
    if (item->v.size() != dim) throw Error(ErrorCode::DimensionMismatch, "phrase vectors differ in dimension");
  }

  const std::size_t n = items.size();
  // sum[i][j]: total pairwise cosine distance between clusters i and j.
  std::vector<std::vector<double>> sum(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = 1.0 - cosine(items[i]->v, items[j]->v);
      sum[i][j] = sum[j][i] = d;
    }
  }

  std::vector<std::vector<std::size_t>> members(n);
  for (std::size_t i = 0; i < n; ++i) members[i] = {i};
  std::vector<bool> active(n, true);
  const bool merge_all = theta >= 2.0;

  for (std::size_t remaining = n; remaining > 1; --remaining) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0;
    std::size_t bj = 0;
    // Active cluster i is represented by items[i], its smallest member, so
    // index order equals representative order and strict < keeps the first pair.
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        const double avg = sum[i][j] / static_cast<double>(members[i].size() * members[j].size());
        if (avg < best) {
          best = avg;
          bi = i;
          bj = j;
        }
      }
    }
    if (!merge_all && !(best < theta)) break;

    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      sum[bi][k] = sum[k][bi] = sum[bi][k] + sum[bj][k];
    }
    members[bi].insert(members[bi].end(), members[bj].begin(), members[bj].end());
    members[bj].clear();
    active[bj] = false;
  }

  Partition out;
  out.theta = theta;
  for (std::size_t i = 0; i < n; ++i) {
    if (!active[i]) continue;
    std::vector<std::string> ids;
    for (auto m : members[i]) ids.push_back(items[m]->source_id);
    out.clusters.push_back(std::move(ids));
  }
  out.canonicalize();
  return out;
}

namespace {

double choose2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

PartitionScore score(const Partition& predicted, const Partition& gold) {
  const auto universe = predicted.universe();
  if (universe != gold.universe()) {
    throw Error(ErrorCode::UniverseMismatch, "predicted and gold partitions cover different ids");
  }
  std::unordered_map<std::string, std::size_t> pred_of;
  for (std::size_t p = 0; p < predicted.clusters.size(); ++p) {
    for (const auto& id : predicted.clusters[p]) pred_of[id] = p;
  }

  PartitionScore out;
  out.confusion.assign(gold.clusters.size(), std::vector<std::size_t>(predicted.clusters.size(), 0));
  for (std::size_t g = 0; g < gold.clusters.size(); ++g) {
    for (const auto& id : gold.clusters[g]) ++out.confusion[g][pred_of.at(id)];
  }

  const auto n = static_cast<double>(universe.size());
  if (universe.empty()) {
    out.purity = 1.0;
    out.adjusted_rand = 1.0;
    return out;
  }

  double matched = 0.0;
  for (std::size_t p = 0; p < predicted.clusters.size(); ++p) {
    std::size_t best = 0;
    for (std::size_t g = 0; g < gold.clusters.size(); ++g) best = std::max(best, out.confusion[g][p]);
    matched += static_cast<double>(best);
  }
  out.purity = matched / n;

  double index = 0.0;
  for (const auto& row : out.confusion) {
    for (auto c : row) index += choose2(static_cast<double>(c));
  }
  double gold_pairs = 0.0;
  for (const auto& c : gold.clusters) gold_pairs += choose2(static_cast<double>(c.size()));
  double pred_pairs = 0.0;
  for (const auto& c : predicted.clusters) pred_pairs += choose2(static_cast<double>(c.size()));
  const double total = choose2(n);
  const double expected = total > 0.0 ? gold_pairs * pred_pairs / total : 0.0;
  const double max_index = 0.5 * (gold_pairs + pred_pairs);
  // Both partitions trivial (all singletons or a single cluster): they agree completely.
  out.adjusted_rand = max_index == expected ? 1.0 : (index - expected) / (max_index - expected);
  return out;
}

nlohmann::json export_partition(const Partition& partition, const std::vector<RawPhrase>& corpus) {
  std::unordered_map<std::string, const RawPhrase*> by_id;
  for (const auto& p : corpus) by_id[p.id] = &p;
  nlohmann::json doc;
  doc["theta"] = partition.theta;
  doc["clusters"] = nlohmann::json::array();
  for (std::size_t i = 0; i < partition.clusters.size(); ++i) {
    nlohmann::json members = nlohmann::json::array();
    for (const auto& id : partition.clusters[i]) {
      auto it = by_id.find(id);
      members.push_back({{"id", id}, {"text", it == by_id.end() ? "" : it->second->text}});
    }
    doc["clusters"].push_back({{"index", i}, {"members", std::move(members)}});
  }
  return doc;
}

Partition import_partition(const nlohmann::json& doc) {
  Partition out;
  try {
    out.theta = doc.value("theta", kDefaultTheta);
    for (const auto& c : doc.at("clusters")) {
      std::vector<std::string> ids;
      for (const auto& m : c.at("members")) ids.push_back(m.at("id").get<std::string>());
      out.clusters.push_back(std::move(ids));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("partition document: ") + e.what());
  }
  out.canonicalize();
  return out;
}

}  // namespace gesturemap
