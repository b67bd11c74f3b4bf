#include "gesturemap/gestures.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gesturemap/error.hpp"

namespace gesturemap {

void GestureCatalog::add(Gesture gesture) {
  if (gesture.id.empty()) throw Error(ErrorCode::InvalidInput, "gesture id must not be empty");
  if (gesture.duration_ms <= 0) throw Error(ErrorCode::InvalidInput, "gesture " + gesture.id + " needs a positive duration");
  if (find(gesture.id)) throw Error(ErrorCode::InvalidInput, "duplicate gesture id '" + gesture.id + "'");
  gestures_.push_back(std::move(gesture));
}

const Gesture* GestureCatalog::find(const std::string& id) const {
  auto it = std::find_if(gestures_.begin(), gestures_.end(), [&](const Gesture& g) { return g.id == id; });
  return it == gestures_.end() ? nullptr : &*it;
}

GestureCatalog parse_catalog(std::string_view text) {
  GestureCatalog catalog;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string col; std::getline(ss, col, '\t');) cols.push_back(col);
    const std::string where = "catalog line " + std::to_string(line_no) + ": ";
    if (cols.size() < 3) throw Error(ErrorCode::ParseError, where + "expected id, name, duration_ms[, tags]");
    Gesture g;
    g.id = cols[0];
    g.name = cols[1];
    auto [ptr, ec] = std::from_chars(cols[2].data(), cols[2].data() + cols[2].size(), g.duration_ms);
    if (ec != std::errc{} || ptr != cols[2].data() + cols[2].size()) {
      throw Error(ErrorCode::ParseError, where + "bad duration '" + cols[2] + "'");
    }
    if (cols.size() > 3) {
      std::stringstream tags(cols[3]);
      for (std::string tag; std::getline(tags, tag, ',');) {
        if (!tag.empty()) g.tags.push_back(tag);
      }
    }
    try {
      catalog.add(std::move(g));
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, where + e.what());
    }
  }
  return catalog;
}

GestureCatalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open gesture catalog " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_catalog(ss.str());
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Bounded draw from mt19937_64, whose output sequence is fixed by the standard,
// so picks are reproducible across standard libraries.
std::size_t draw(std::mt19937_64& rng, std::size_t bound) { return static_cast<std::size_t>(rng() % bound); }

}  // namespace

GestureCue select_gesture(const Assignment& assignment, const ConceptSet& concepts, const GestureCatalog& catalog,
                          std::uint64_t seed, const std::string& fallback_gesture_id) {
  if (catalog.empty()) throw Error(ErrorCode::InvalidInput, "gesture catalog is empty");
  const Gesture* fallback = catalog.find(fallback_gesture_id);
  if (fallback == nullptr) {
    throw Error(ErrorCode::UnknownGesture, "fallback gesture '" + fallback_gesture_id + "' is not in the catalog");
  }

  GestureCue cue;
  cue.phrase_id = assignment.phrase_id;
  cue.concept_id = assignment.concept_id;
  cue.similarity = assignment.similarity;
  cue.selection_seed = seed;

  const Concept* c = assignment.concept_id ? concepts.find(*assignment.concept_id) : nullptr;
  if (c == nullptr || c->gesture_ids.empty()) {
    cue.gesture_id = fallback->id;
    cue.duration_ms = fallback->duration_ms;
    cue.fallback = true;
    return cue;
  }
  for (const auto& id : c->gesture_ids) {
    if (!catalog.find(id)) {
      throw Error(ErrorCode::UnknownGesture, "concept " + c->id + " references unknown gesture '" + id + "'");
    }
  }
  std::size_t pick = 0;
  if (c->gesture_ids.size() > 1) {
    std::mt19937_64 rng(seed ^ fnv1a(assignment.phrase_id));
    pick = draw(rng, c->gesture_ids.size());
  }
  const Gesture* g = catalog.find(c->gesture_ids[pick]);
  cue.gesture_id = g->id;
  cue.duration_ms = g->duration_ms;
  return cue;
}

GestureMapper::GestureMapper(std::shared_ptr<const Pipeline> pipeline, std::shared_ptr<const ConceptSet> concepts,
                             std::shared_ptr<const GestureCatalog> catalog, MapperSettings settings)
    : pipeline_(std::move(pipeline)),
      concepts_(std::move(concepts)),
      catalog_(std::move(catalog)),
      settings_(std::move(settings)) {
  if (!pipeline_ || !concepts_ || !catalog_) throw Error(ErrorCode::InvalidInput, "gesture mapper needs all stores");
  if (!(settings_.tau >= 0.0 && settings_.tau <= 1.0)) throw Error(ErrorCode::OutOfRange, "tau must lie in [0, 1]");
  if (!catalog_->find(settings_.fallback_gesture)) {
    throw Error(ErrorCode::UnknownGesture, "fallback gesture '" + settings_.fallback_gesture + "' is not in the catalog");
  }
  if (!concepts_->empty() && concepts_->dim() != pipeline_->dim()) {
    throw Error(ErrorCode::DimensionMismatch, "concept store and vector store dimensions differ");
  }
}

MappingTrace GestureMapper::map(const RawPhrase& phrase) const {
  MappingTrace t;
  t.phrase = pipeline_->trace(phrase);
  t.assignment = assign(phrase, t.phrase.vector, *concepts_, concepts_->rules(), settings_.tau);
  t.cue = select_gesture(t.assignment, *concepts_, *catalog_, settings_.seed, settings_.fallback_gesture);
  return t;
}

MappingTrace map_phrase_to_gesture(const RawPhrase& phrase, const GestureMapper& mapper) { return mapper.map(phrase); }

namespace {

bool is_derangement(const std::vector<PhraseGesturePair>& original, const std::vector<std::string>& gestures) {
  for (std::size_t i = 0; i < gestures.size(); ++i) {
    if (gestures[i] == original[i].second) return false;
  }
  return true;
}

// Stable construction used when random draws keep failing (heavy repeats):
// sort positions by gesture and rotate by the largest multiplicity.
std::vector<std::string> constructed_derangement(const std::vector<PhraseGesturePair>& pairs) {
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return pairs[a].second < pairs[b].second; });
  std::map<std::string, std::size_t> counts;
  std::size_t shift = 0;
  for (const auto& p : pairs) shift = std::max(shift, ++counts[p.second]);
  std::vector<std::string> out(pairs.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    out[order[k]] = pairs[order[(k + shift) % order.size()]].second;
  }
  return out;
}

}  // namespace

std::vector<PhraseGesturePair> shuffle_pairs(const std::vector<PhraseGesturePair>& pairs, std::uint64_t seed) {
  if (pairs.size() < 2) throw Error(ErrorCode::TooFewPairs, "shuffling needs at least two phrase-gesture pairs");

  std::map<std::string, std::size_t> counts;
  std::size_t max_count = 0;
  for (const auto& p : pairs) max_count = std::max(max_count, ++counts[p.second]);
  const bool derangement_exists = 2 * max_count <= pairs.size();

  std::mt19937_64 rng(seed);
  std::vector<std::string> gestures;
  for (const auto& p : pairs) gestures.push_back(p.second);
  constexpr int kMaxAttempts = 10000;
  bool found = false;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    for (std::size_t i = gestures.size() - 1; i > 0; --i) std::swap(gestures[i], gestures[draw(rng, i + 1)]);
    if (!derangement_exists || is_derangement(pairs, gestures)) {
      found = true;
      break;
    }
  }
  if (!found) gestures = constructed_derangement(pairs);

  std::vector<PhraseGesturePair> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) out.emplace_back(pairs[i].first, gestures[i]);
  return out;
}

nlohmann::json to_json(const GestureCue& cue) {
  return {{"phrase_id", cue.phrase_id},
          {"concept_id", cue.concept_id ? nlohmann::json(*cue.concept_id) : nlohmann::json(nullptr)},
          {"gesture_id", cue.gesture_id},
          {"similarity", cue.similarity},
          {"selection_seed", cue.selection_seed},
          {"duration_ms", cue.duration_ms},
          {"fallback", cue.fallback}};
}

nlohmann::json to_json(const MappingTrace& trace) {
  auto doc = to_json(trace.phrase);
  doc["assignment"] = to_json(trace.assignment);
  doc["cue"] = to_json(trace.cue);
  return doc;
}

}  // namespace gesturemap
