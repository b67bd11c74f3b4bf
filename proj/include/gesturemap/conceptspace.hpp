#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "gesturemap/clusterer.hpp"
#include "gesturemap/embeddings.hpp"
#include "gesturemap/normalizer.hpp"

namespace gesturemap {

class Pipeline;

enum class Provenance { Manual, Auto, Merged };

std::string_view provenance_name(Provenance p) noexcept;
Provenance parse_provenance(std::string_view name);

struct SeedPhrase {
  std::string id;
  std::string text;
  friend bool operator==(const SeedPhrase&, const SeedPhrase&) = default;
};

/// A labelled region of the semantic space: nameplate, seed phrases, the
/// centroid recomputed from those seeds, and the gestures it may trigger.
struct Concept {
  std::string id;
  std::string nameplate;
  std::vector<SeedPhrase> seeds;
  Vector centroid;
  std::vector<std::string> gesture_ids;
  Provenance provenance = Provenance::Auto;
};

enum class MatchKind { Exact, Prefix, Contains };

std::string_view match_kind_name(MatchKind kind) noexcept;
MatchKind parse_match_kind(std::string_view name);

/// Surface-pattern rule for meaning carried by usage rather than by the words,
/// e.g. sentence-final から turning いい into a refusal.
struct OverrideRule {
  std::string id;
  MatchKind kind = MatchKind::Exact;
  std::string surface;
  std::string target_concept_id;
  int priority = 0;
  std::string note;

  /// Matched against the phrase text with surrounding white space trimmed.
  bool matches(std::string_view text) const;
};

enum class AssignReason { Rule, SeedExact, Nearest, None };

std::string_view reason_name(AssignReason r) noexcept;

struct Assignment {
  std::string phrase_id;
  std::optional<std::string> concept_id;  // nullopt: Unassigned
  double similarity = 0.0;                // in [0, 1]; 1 for rule and seed hits
  AssignReason reason = AssignReason::None;
  std::string rule_id;
  // Best centroid match even when it fell below tau; feeds the curation queue.
  double best_similarity = 0.0;
  std::string nearest_concept;

  bool assigned() const noexcept { return concept_id.has_value(); }
};

constexpr double kDefaultTau = 0.5;

namespace curation {

struct Merge {
  std::string a;
  std::string b;
};
struct Split {
  std::string id;
  std::vector<std::string> members;  // seed phrase ids moved to the new concept
  std::string nameplate;             // empty: text of the first moved seed
};
struct Rename {
  std::string id;
  std::string nameplate;
};
struct AttachGesture {
  std::string id;
  std::string gesture_id;
};
struct AddRule {
  OverrideRule rule;  // empty id: the next free rule id is used
};
struct RemoveRule {
  std::string rule_id;
};
struct MoveSeed {
  std::string phrase_id;
  std::string from;
  std::string to;
};

}  // namespace curation

using CurationAction = std::variant<curation::Merge, curation::Split, curation::Rename, curation::AttachGesture,
                                    curation::AddRule, curation::RemoveRule, curation::MoveSeed>;

struct LogEntry {
  std::size_t seq = 0;
  std::string timestamp;
  CurationAction action;
};

using PhraseEmbedder = std::function<PhraseVector(const RawPhrase&)>;

/// Adapts a pipeline into the embedder concept sets use for centroids.
PhraseEmbedder embedder_for(const Pipeline& pipeline);

struct ConceptState {
  std::vector<Concept> concepts;  // sorted by id
  std::vector<OverrideRule> rules;
  std::size_t next_concept = 1;
  std::size_t next_rule = 1;
};

struct BuildOptions {
  bool default_nameplates = true;  // unlabeled clusters take their first member's text
  Provenance provenance = Provenance::Auto;
  std::map<std::string, std::vector<std::string>> gestures;  // attached by nameplate
};

/// The curated semantic space. A value type: curation returns a new set, so a
/// snapshot held by a reader never changes underneath it.
class ConceptSet {
 public:
  ConceptSet() = default;
  explicit ConceptSet(std::size_t dim) : dim_(dim) {}

  const std::vector<Concept>& concepts() const noexcept { return state_.concepts; }
  const std::vector<OverrideRule>& rules() const noexcept { return state_.rules; }
  const std::vector<LogEntry>& log() const noexcept { return log_; }
  const ConceptState& state() const noexcept { return state_; }
  /// State before any curation; replaying log() over it reproduces state().
  const ConceptState& base() const noexcept { return base_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return state_.concepts.empty(); }

  const Concept* find(std::string_view id) const;
  const Concept* find_by_nameplate(std::string_view nameplate) const;
  const OverrideRule* find_rule(std::string_view id) const;

  /// Rebuilds a set from persisted parts; validates every invariant.
  static ConceptSet from_parts(std::size_t dim, ConceptState base, ConceptState state, std::vector<LogEntry> log);

  friend ConceptSet build_concepts(const Partition&, const std::map<std::string, std::string>&,
                                   const std::vector<RawPhrase>&, const PhraseEmbedder&, const BuildOptions&);
  friend ConceptSet apply_curation(const ConceptSet&, const CurationAction&, const PhraseEmbedder&, std::string);
  friend ConceptSet with_rules(const ConceptSet&, std::vector<OverrideRule>);

 private:
  void validate() const;

  std::size_t dim_ = 0;
  ConceptState base_;
  ConceptState state_;
  std::vector<LogEntry> log_;
};

/// One concept per cluster. `nameplates` is keyed by the cluster's smallest
/// member id; the centroid is the normalized mean of member phrase vectors.
ConceptSet build_concepts(const Partition& partition, const std::map<std::string, std::string>& nameplates,
                          const std::vector<RawPhrase>& corpus, const PhraseEmbedder& embedder,
                          const BuildOptions& options = {});

/// Replaces the base rule set of a freshly built concept set (no log yet).
ConceptSet with_rules(const ConceptSet& set, std::vector<OverrideRule> rules);

/// Applies one curation action and appends it to the log. Throws
/// Error(UnknownId), Error(InvalidSplit) or Error(InvalidRule).
ConceptSet apply_curation(const ConceptSet& set, const CurationAction& action, const PhraseEmbedder& embedder,
                          std::string timestamp = {});

/// Re-applies the log over the base state.
ConceptSet replay(const ConceptSet& set, const PhraseEmbedder& embedder);

Vector compute_centroid(const std::vector<SeedPhrase>& seeds, std::size_t dim, const PhraseEmbedder& embedder);

/// Rule (highest priority), then exact seed text, then nearest centroid with
/// cosine >= tau, else Unassigned.
Assignment assign(const RawPhrase& phrase, const PhraseVector& vector, const ConceptSet& concepts,
                  const std::vector<OverrideRule>& rules, double tau = kDefaultTau);
Assignment assign(const RawPhrase& phrase, const ConceptSet& concepts, const std::vector<OverrideRule>& rules,
                  double tau, const Pipeline& pipeline);

/// Concept ids by assignment count (descending, ties by id). With
/// require_gesture, concepts without gestures are dropped before ranking.
std::vector<std::string> rank_concepts_by_frequency(const std::vector<Assignment>& assignments,
                                                    const ConceptSet& concepts, bool require_gesture);

/// TSV: phrase_id, text, best_similarity, nearest_concept for every unassigned phrase.
std::string export_unassigned(const std::vector<RawPhrase>& phrases, const std::vector<Assignment>& assignments);

std::string current_timestamp();

// JSON documents --------------------------------------------------------------

inline constexpr int kConceptStoreVersion = 1;

nlohmann::json to_json(const Concept& concept_);
nlohmann::json to_json(const OverrideRule& rule);
nlohmann::json to_json(const Assignment& assignment);
nlohmann::json to_json(const CurationAction& action);
nlohmann::json to_json(const ConceptSet& set);

OverrideRule rule_from_json(const nlohmann::json& doc);
CurationAction action_from_json(const nlohmann::json& doc);
ConceptSet concept_set_from_json(const nlohmann::json& doc);

/// The store document with log timestamps removed, as a string, for replay comparison.
std::string canonical_store_text(const ConceptSet& set);

/// Write-temp-then-rename so readers never observe a half-written store.
void save_concept_store(const std::filesystem::path& path, const ConceptSet& set);
/// Throws Error(StoreCorrupt) when the document fails to parse or validate.
ConceptSet load_concept_store(const std::filesystem::path& path);

/// TSV rows "kind<TAB>surface<TAB>target nameplate or id<TAB>priority<TAB>note".
std::vector<OverrideRule> load_rules(const std::filesystem::path& path, const ConceptSet& concepts);

/// Gold labels: the phrases, the partition they induce, and the nameplate of
/// each cluster keyed by its smallest member id.
struct LabelledCorpus {
  std::vector<RawPhrase> phrases;
  Partition partition;
  std::map<std::string, std::string> nameplates;
};

/// TSV rows "id<TAB>text<TAB>nameplate"; phrases sharing a nameplate form one cluster.
LabelledCorpus parse_labelled_corpus(std::string_view text);
LabelledCorpus load_labelled_corpus(const std::filesystem::path& path);

/// TSV rows "nameplate<TAB>gesture ids separated by spaces".
std::map<std::string, std::vector<std::string>> load_gesture_attachments(const std::filesystem::path& path);

}  // namespace gesturemap
