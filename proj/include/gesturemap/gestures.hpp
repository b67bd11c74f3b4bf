#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gesturemap/conceptspace.hpp"
#include "gesturemap/pipeline.hpp"

namespace gesturemap {

struct Gesture {
  std::string id;
  std::string name;
  std::int64_t duration_ms = 0;
  std::vector<std::string> tags;
};

class GestureCatalog {
 public:
  /// Throws on duplicate id or non-positive duration.
  void add(Gesture gesture);
  const Gesture* find(const std::string& id) const;
  const std::vector<Gesture>& gestures() const noexcept { return gestures_; }
  bool empty() const noexcept { return gestures_.empty(); }

 private:
  std::vector<Gesture> gestures_;
};

/// TSV rows "id<TAB>name<TAB>duration_ms<TAB>tags" with comma-separated tags.
GestureCatalog load_catalog(const std::filesystem::path& path);
GestureCatalog parse_catalog(std::string_view text);

struct GestureCue {
  std::string phrase_id;
  std::optional<std::string> concept_id;
  std::string gesture_id;
  double similarity = 0.0;
  std::uint64_t selection_seed = 0;
  std::int64_t duration_ms = 0;
  bool fallback = false;
};

/// Fallback for unassigned phrases and gesture-less concepts; otherwise a
/// seeded uniform pick among the concept's gestures.
GestureCue select_gesture(const Assignment& assignment, const ConceptSet& concepts, const GestureCatalog& catalog,
                          std::uint64_t seed, const std::string& fallback_gesture_id);

struct MappingTrace {
  PhraseTrace phrase;
  Assignment assignment;
  GestureCue cue;
};

struct MapperSettings {
  double tau = kDefaultTau;
  std::uint64_t seed = 0;
  std::string fallback_gesture = "idle";
};

/// The whole phrase -> concept -> gesture path over one concept-set snapshot.
class GestureMapper {
 public:
  GestureMapper(std::shared_ptr<const Pipeline> pipeline, std::shared_ptr<const ConceptSet> concepts,
                std::shared_ptr<const GestureCatalog> catalog, MapperSettings settings);

  MappingTrace map(const RawPhrase& phrase) const;

  const Pipeline& pipeline() const noexcept { return *pipeline_; }
  const ConceptSet& concepts() const noexcept { return *concepts_; }
  const GestureCatalog& catalog() const noexcept { return *catalog_; }
  const MapperSettings& settings() const noexcept { return settings_; }

 private:
  std::shared_ptr<const Pipeline> pipeline_;
  std::shared_ptr<const ConceptSet> concepts_;
  std::shared_ptr<const GestureCatalog> catalog_;
  MapperSettings settings_;
};

MappingTrace map_phrase_to_gesture(const RawPhrase& phrase, const GestureMapper& mapper);

using PhraseGesturePair = std::pair<std::string, std::string>;

/// Permutes the gestures among the phrases so that no phrase keeps its gesture
/// whenever such a permutation exists. Throws Error(TooFewPairs) below two pairs.
std::vector<PhraseGesturePair> shuffle_pairs(const std::vector<PhraseGesturePair>& pairs, std::uint64_t seed);

nlohmann::json to_json(const GestureCue& cue);
nlohmann::json to_json(const MappingTrace& trace);

}  // namespace gesturemap
