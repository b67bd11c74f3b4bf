#include "gesturemap/conceptspace.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <set>
#include <sstream>
#include <unordered_map>

#include "gesturemap/error.hpp"
#include "gesturemap/pipeline.hpp"
#include "gesturemap/utf8.hpp"

namespace gesturemap {

std::string_view provenance_name(Provenance p) noexcept {
  switch (p) {
    case Provenance::Manual: return "manual";
    case Provenance::Auto: return "auto";
    case Provenance::Merged: return "merged";
  }
  return "auto";
}

Provenance parse_provenance(std::string_view name) {
  if (name == "manual") return Provenance::Manual;
  if (name == "auto") return Provenance::Auto;
  if (name == "merged") return Provenance::Merged;
  throw Error(ErrorCode::ParseError, "unknown provenance '" + std::string(name) + "'");
}

std::string_view match_kind_name(MatchKind kind) noexcept {
  switch (kind) {
    case MatchKind::Exact: return "exact";
    case MatchKind::Prefix: return "prefix";
    case MatchKind::Contains: return "contains";
  }
  return "exact";
}

MatchKind parse_match_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "exact") return MatchKind::Exact;
  if (lower == "prefix") return MatchKind::Prefix;
  if (lower == "contains") return MatchKind::Contains;
  throw Error(ErrorCode::InvalidRule, "unknown rule match kind '" + std::string(name) + "'");
}

std::string_view reason_name(AssignReason r) noexcept {
  switch (r) {
    case AssignReason::Rule: return "rule";
    case AssignReason::SeedExact: return "seed_exact";
    case AssignReason::Nearest: return "nearest";
    case AssignReason::None: return "none";
  }
  return "none";
}

bool OverrideRule::matches(std::string_view text) const {
  const std::string trimmed = utf8::collapse_whitespace(text);
  switch (kind) {
    case MatchKind::Exact: return trimmed == surface;
    case MatchKind::Prefix: return trimmed.starts_with(surface);
    case MatchKind::Contains: return trimmed.find(surface) != std::string::npos;
  }
  return false;
}

PhraseEmbedder embedder_for(const Pipeline& pipeline) {
  return [&pipeline](const RawPhrase& p) { return pipeline.embed(p); };
}

std::string current_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// ConceptSet

namespace {

std::string format_id(char prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%04zu", prefix, n);
  return buf;
}

Concept* find_mut(ConceptState& state, std::string_view id) {
  auto it = std::find_if(state.concepts.begin(), state.concepts.end(), [&](const Concept& c) { return c.id == id; });
  return it == state.concepts.end() ? nullptr : &*it;
}

Concept& require(ConceptState& state, std::string_view id) {
  if (auto* c = find_mut(state, id)) return *c;
  throw Error(ErrorCode::UnknownId, "unknown concept '" + std::string(id) + "'");
}

void sort_concepts(ConceptState& state) {
  std::sort(state.concepts.begin(), state.concepts.end(), [](const Concept& a, const Concept& b) { return a.id < b.id; });
}

void sort_rules(ConceptState& state) {
  std::sort(state.rules.begin(), state.rules.end(), [](const OverrideRule& a, const OverrideRule& b) { return a.id < b.id; });
}

void check_rule(const ConceptState& state, const OverrideRule& rule) {
  if (rule.surface.empty()) throw Error(ErrorCode::InvalidRule, "rule surface must not be empty");
  if (rule.id.empty()) throw Error(ErrorCode::InvalidRule, "rule id must not be empty");
  if (std::none_of(state.concepts.begin(), state.concepts.end(),
                   [&](const Concept& c) { return c.id == rule.target_concept_id; })) {
    throw Error(ErrorCode::UnknownId, "rule targets unknown concept '" + rule.target_concept_id + "'");
  }
  for (const auto& other : state.rules) {
    if (other.id == rule.id) continue;
    if (other.priority == rule.priority) {
      throw Error(ErrorCode::InvalidRule, "rule priority " + std::to_string(rule.priority) + " already used by " + other.id);
    }
  }
}

void validate_state(const ConceptState& state, std::size_t dim) {
  std::set<std::string> concept_ids;
  std::set<std::string> seed_ids;
  for (const auto& c : state.concepts) {
    if (c.id.empty() || !concept_ids.insert(c.id).second) {
      throw Error(ErrorCode::StoreCorrupt, "duplicate or empty concept id '" + c.id + "'");
    }
    if (c.nameplate.empty()) throw Error(ErrorCode::StoreCorrupt, "concept " + c.id + " has an empty nameplate");
    if (c.centroid.size() != dim) throw Error(ErrorCode::StoreCorrupt, "concept " + c.id + " centroid has wrong dimension");
    for (const auto& s : c.seeds) {
      if (!seed_ids.insert(s.id).second) {
        throw Error(ErrorCode::StoreCorrupt, "seed phrase '" + s.id + "' belongs to two concepts");
      }
    }
  }
  std::set<std::string> rule_ids;
  std::set<int> priorities;
  for (const auto& r : state.rules) {
    if (!rule_ids.insert(r.id).second) throw Error(ErrorCode::StoreCorrupt, "duplicate rule id '" + r.id + "'");
    if (!priorities.insert(r.priority).second) throw Error(ErrorCode::StoreCorrupt, "duplicate rule priority");
    if (r.surface.empty()) throw Error(ErrorCode::StoreCorrupt, "rule " + r.id + " has an empty surface");
    if (!concept_ids.count(r.target_concept_id)) {
      throw Error(ErrorCode::StoreCorrupt, "rule " + r.id + " targets unknown concept");
    }
  }
}

}  // namespace

const Concept* ConceptSet::find(std::string_view id) const {
  auto it = std::find_if(state_.concepts.begin(), state_.concepts.end(), [&](const Concept& c) { return c.id == id; });
  return it == state_.concepts.end() ? nullptr : &*it;
}

const Concept* ConceptSet::find_by_nameplate(std::string_view nameplate) const {
  auto it = std::find_if(state_.concepts.begin(), state_.concepts.end(),
                         [&](const Concept& c) { return c.nameplate == nameplate; });
  return it == state_.concepts.end() ? nullptr : &*it;
}

const OverrideRule* ConceptSet::find_rule(std::string_view id) const {
  auto it = std::find_if(state_.rules.begin(), state_.rules.end(), [&](const OverrideRule& r) { return r.id == id; });
  return it == state_.rules.end() ? nullptr : &*it;
}

void ConceptSet::validate() const {
  validate_state(base_, dim_);
  validate_state(state_, dim_);
  for (std::size_t i = 0; i < log_.size(); ++i) {
    if (log_[i].seq != i + 1) throw Error(ErrorCode::StoreCorrupt, "curation log sequence is not contiguous");
  }
}

ConceptSet ConceptSet::from_parts(std::size_t dim, ConceptState base, ConceptState state, std::vector<LogEntry> log) {
  ConceptSet set(dim);
  set.base_ = std::move(base);
  set.state_ = std::move(state);
  set.log_ = std::move(log);
  sort_concepts(set.base_);
  sort_concepts(set.state_);
  sort_rules(set.base_);
  sort_rules(set.state_);
  set.validate();
  return set;
}

Vector compute_centroid(const std::vector<SeedPhrase>& seeds, std::size_t dim, const PhraseEmbedder& embedder) {
  Vector sum(dim, 0.0);
  std::size_t nonzero = 0;
  for (const auto& seed : seeds) {
    const PhraseVector pv = embedder(RawPhrase{seed.id, seed.text});
    if (pv.v.size() != dim) throw Error(ErrorCode::DimensionMismatch, "seed vector dimension differs from concept set");
    if (pv.is_zero) continue;
    ++nonzero;
    for (std::size_t k = 0; k < dim; ++k) sum[k] += pv.v[k];
  }
  const double norm = l2_norm(sum);
  if (nonzero == 0 || norm == 0.0) return Vector(dim, 0.0);
  for (double& x : sum) x /= norm;
  return sum;
}

ConceptSet build_concepts(const Partition& partition, const std::map<std::string, std::string>& nameplates,
                          const std::vector<RawPhrase>& corpus, const PhraseEmbedder& embedder,
                          const BuildOptions& options) {
  std::unordered_map<std::string, const RawPhrase*> by_id;
  for (const auto& p : corpus) by_id[p.id] = &p;

  std::size_t dim = 0;
  if (!corpus.empty()) dim = embedder(corpus.front()).v.size();
  ConceptSet set(dim);
  for (const auto& cluster_ids : partition.clusters) {
    if (cluster_ids.empty()) continue;
    Concept c;
    c.id = format_id('C', set.state_.next_concept++);
    c.provenance = options.provenance;
    for (const auto& id : cluster_ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw Error(ErrorCode::UnknownId, "partition member '" + id + "' is not in the corpus");
      c.seeds.push_back(SeedPhrase{id, it->second->text});
    }
    if (auto label = nameplates.find(cluster_ids.front()); label != nameplates.end() && !label->second.empty()) {
      c.nameplate = label->second;
    } else if (options.default_nameplates) {
      c.nameplate = utf8::collapse_whitespace(c.seeds.front().text);
      if (c.nameplate.empty()) c.nameplate = c.seeds.front().id;
    } else {
      throw Error(ErrorCode::MissingLabel, "cluster starting with '" + cluster_ids.front() + "' has no nameplate");
    }
    if (auto g = options.gestures.find(c.nameplate); g != options.gestures.end()) c.gesture_ids = g->second;
    c.centroid = compute_centroid(c.seeds, dim, embedder);
    set.state_.concepts.push_back(std::move(c));
  }
  sort_concepts(set.state_);
  set.base_ = set.state_;
  set.validate();
  return set;
}

ConceptSet with_rules(const ConceptSet& set, std::vector<OverrideRule> rules) {
  if (!set.log_.empty()) throw Error(ErrorCode::InvalidInput, "base rules can only be set before curation");
  ConceptSet out = set;
  out.state_.rules.clear();
  for (auto& rule : rules) {
    if (rule.id.empty()) rule.id = format_id('R', out.state_.next_rule++);
    check_rule(out.state_, rule);
    if (out.find_rule(rule.id)) throw Error(ErrorCode::InvalidRule, "duplicate rule id '" + rule.id + "'");
    out.state_.rules.push_back(std::move(rule));
  }
  sort_rules(out.state_);
  out.base_ = out.state_;
  out.validate();
  return out;
}

namespace {

struct ActionApplier {
  ConceptState& state;
  std::size_t dim;
  const PhraseEmbedder& embedder;

  void refresh(Concept& c) { c.centroid = compute_centroid(c.seeds, dim, embedder); }

  void operator()(const curation::Merge& m) {
    if (m.a == m.b) throw Error(ErrorCode::InvalidInput, "cannot merge a concept with itself");
    Concept& a = require(state, m.a);
    Concept b = require(state, m.b);
    a.seeds.insert(a.seeds.end(), b.seeds.begin(), b.seeds.end());
    for (const auto& g : b.gesture_ids) {
      if (std::find(a.gesture_ids.begin(), a.gesture_ids.end(), g) == a.gesture_ids.end()) a.gesture_ids.push_back(g);
    }
    a.provenance = Provenance::Merged;
    refresh(a);
    std::erase_if(state.concepts, [&](const Concept& c) { return c.id == m.b; });
    for (auto& rule : state.rules) {
      if (rule.target_concept_id == m.b) rule.target_concept_id = m.a;
    }
  }

  void operator()(const curation::Split& s) {
    Concept& source = require(state, s.id);
    std::set<std::string> wanted(s.members.begin(), s.members.end());
    if (wanted.empty() || wanted.size() != s.members.size() || wanted.size() >= source.seeds.size()) {
      throw Error(ErrorCode::InvalidSplit, "split of " + s.id + " needs a proper, nonempty subset of its seeds");
    }
    for (const auto& id : wanted) {
      if (std::none_of(source.seeds.begin(), source.seeds.end(), [&](const SeedPhrase& p) { return p.id == id; })) {
        throw Error(ErrorCode::InvalidSplit, "seed '" + id + "' is not in concept " + s.id);
      }
    }
    Concept fresh;
    fresh.id = format_id('C', state.next_concept++);
    fresh.provenance = Provenance::Manual;
    std::vector<SeedPhrase> kept;
    for (auto& seed : source.seeds) {
      (wanted.count(seed.id) ? fresh.seeds : kept).push_back(seed);
    }
    source.seeds = std::move(kept);
    fresh.nameplate = s.nameplate.empty() ? utf8::collapse_whitespace(fresh.seeds.front().text) : s.nameplate;
    if (fresh.nameplate.empty()) fresh.nameplate = fresh.seeds.front().id;
    refresh(source);
    refresh(fresh);
    state.concepts.push_back(std::move(fresh));
    sort_concepts(state);
  }

  void operator()(const curation::Rename& r) {
    if (utf8::collapse_whitespace(r.nameplate).empty()) throw Error(ErrorCode::InvalidInput, "nameplate must not be empty");
    require(state, r.id).nameplate = r.nameplate;
  }

  void operator()(const curation::AttachGesture& g) {
    if (g.gesture_id.empty()) throw Error(ErrorCode::InvalidInput, "gesture id must not be empty");
    auto& ids = require(state, g.id).gesture_ids;
    if (std::find(ids.begin(), ids.end(), g.gesture_id) == ids.end()) ids.push_back(g.gesture_id);
  }

  void operator()(const curation::AddRule& a) {
    OverrideRule rule = a.rule;
    if (rule.id.empty()) {
      rule.id = format_id('R', state.next_rule++);
    } else if (std::any_of(state.rules.begin(), state.rules.end(), [&](const auto& r) { return r.id == rule.id; })) {
      throw Error(ErrorCode::InvalidRule, "duplicate rule id '" + rule.id + "'");
    }
    check_rule(state, rule);
    state.rules.push_back(std::move(rule));
    sort_rules(state);
  }

  void operator()(const curation::RemoveRule& r) {
    const auto before = state.rules.size();
    std::erase_if(state.rules, [&](const OverrideRule& rule) { return rule.id == r.rule_id; });
    if (state.rules.size() == before) throw Error(ErrorCode::UnknownId, "unknown rule '" + r.rule_id + "'");
  }

  void operator()(const curation::MoveSeed& m) {
    if (m.from == m.to) throw Error(ErrorCode::InvalidInput, "seed move needs two different concepts");
    Concept& from = require(state, m.from);
    Concept& to = require(state, m.to);
    auto it = std::find_if(from.seeds.begin(), from.seeds.end(), [&](const SeedPhrase& p) { return p.id == m.phrase_id; });
    if (it == from.seeds.end()) {
      throw Error(ErrorCode::UnknownId, "seed '" + m.phrase_id + "' is not in concept " + m.from);
    }
    to.seeds.push_back(*it);
    from.seeds.erase(it);
    refresh(from);
    refresh(to);
  }
};

}  // namespace

ConceptSet apply_curation(const ConceptSet& set, const CurationAction& action, const PhraseEmbedder& embedder,
                          std::string timestamp) {
  ConceptSet out = set;
  std::visit(ActionApplier{out.state_, out.dim_, embedder}, action);
  out.log_.push_back(LogEntry{out.log_.size() + 1, timestamp.empty() ? current_timestamp() : std::move(timestamp), action});
  out.validate();
  return out;
}

ConceptSet replay(const ConceptSet& set, const PhraseEmbedder& embedder) {
  ConceptSet out = ConceptSet::from_parts(set.dim(), set.base(), set.base(), {});
  for (const auto& entry : set.log()) out = apply_curation(out, entry.action, embedder, entry.timestamp);
  return out;
}

// ---------------------------------------------------------------------------
// Assignment

Assignment assign(const RawPhrase& phrase, const PhraseVector& vector, const ConceptSet& concepts,
                  const std::vector<OverrideRule>& rules, double tau) {
  Assignment out;
  out.phrase_id = phrase.id;

  const OverrideRule* best_rule = nullptr;
  for (const auto& rule : rules) {
    if (!concepts.find(rule.target_concept_id)) continue;
    if (rule.matches(phrase.text) && (best_rule == nullptr || rule.priority > best_rule->priority)) best_rule = &rule;
  }

  // Nearest centroid is computed in every case so traces and the curation
  // queue can show how close the phrase came.
  double best = -2.0;
  const Concept* nearest = nullptr;
  if (!vector.is_zero) {
    for (const auto& c : concepts.concepts()) {
      const double sim = cosine(vector.v, c.centroid);
      if (sim > best) {
        best = sim;
        nearest = &c;
      }
    }
  }
  if (nearest != nullptr) {
    out.best_similarity = std::clamp(best, 0.0, 1.0);
    out.nearest_concept = nearest->id;
  }

  if (best_rule != nullptr) {
    out.concept_id = best_rule->target_concept_id;
    out.similarity = 1.0;
    out.reason = AssignReason::Rule;
    out.rule_id = best_rule->id;
    return out;
  }

  for (const auto& c : concepts.concepts()) {
    for (const auto& seed : c.seeds) {
      if (seed.text == phrase.text) {
        out.concept_id = c.id;
        out.similarity = 1.0;
        out.reason = AssignReason::SeedExact;
        return out;
      }
    }
  }

  if (nearest != nullptr && best > 0.0 && best >= tau) {
    out.concept_id = nearest->id;
    out.similarity = std::clamp(best, 0.0, 1.0);
    out.reason = AssignReason::Nearest;
  }
  return out;
}

Assignment assign(const RawPhrase& phrase, const ConceptSet& concepts, const std::vector<OverrideRule>& rules,
                  double tau, const Pipeline& pipeline) {
  return assign(phrase, pipeline.embed(phrase), concepts, rules, tau);
}

std::vector<std::string> rank_concepts_by_frequency(const std::vector<Assignment>& assignments,
                                                    const ConceptSet& concepts, bool require_gesture) {
  std::map<std::string, std::size_t> counts;
  for (const auto& a : assignments) {
    if (!a.concept_id) continue;
    const Concept* c = concepts.find(*a.concept_id);
    if (c == nullptr) continue;
    if (require_gesture && c->gesture_ids.empty()) continue;
    ++counts[c->id];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
  std::vector<std::string> out;
  for (auto& [id, _] : ranked) out.push_back(id);
  return out;
}

std::string export_unassigned(const std::vector<RawPhrase>& phrases, const std::vector<Assignment>& assignments) {
  std::unordered_map<std::string, const RawPhrase*> by_id;
  for (const auto& p : phrases) by_id[p.id] = &p;
  std::ostringstream out;
  out << "phrase_id\ttext\tbest_similarity\tnearest_concept\n";
  for (const auto& a : assignments) {
    if (a.assigned()) continue;
    auto it = by_id.find(a.phrase_id);
    std::string text = it == by_id.end() ? "" : it->second->text;
    std::replace(text.begin(), text.end(), '\t', ' ');
    char sim[32];
    std::snprintf(sim, sizeof sim, "%.6f", a.best_similarity);
    out << a.phrase_id << '\t' << text << '\t' << sim << '\t' << a.nearest_concept << '\n';
  }
  return out.str();
}

}  // namespace gesturemap
