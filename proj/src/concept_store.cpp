#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "gesturemap/conceptspace.hpp"
#include "gesturemap/error.hpp"

namespace gesturemap {

using nlohmann::json;

json to_json(const Concept& c) {
  json seeds = json::array();
  for (const auto& s : c.seeds) seeds.push_back({{"id", s.id}, {"text", s.text}});
  return {{"id", c.id},
          {"nameplate", c.nameplate},
          {"seeds", std::move(seeds)},
          {"centroid", c.centroid},
          {"gesture_ids", c.gesture_ids},
          {"provenance", provenance_name(c.provenance)}};
}

json to_json(const OverrideRule& r) {
  return {{"id", r.id},
          {"match", match_kind_name(r.kind)},
          {"surface", r.surface},
          {"target", r.target_concept_id},
          {"priority", r.priority},
          {"note", r.note}};
}

json to_json(const Assignment& a) {
  json doc = {{"phrase_id", a.phrase_id},
              {"concept_id", a.concept_id ? json(*a.concept_id) : json(nullptr)},
              {"similarity", a.similarity},
              {"reason", reason_name(a.reason)},
              {"best_similarity", a.best_similarity},
              {"nearest_concept", a.nearest_concept}};
  if (a.reason == AssignReason::Rule) doc["rule_id"] = a.rule_id;
  return doc;
}

namespace {

struct ActionWriter {
  json operator()(const curation::Merge& m) const { return {{"type", "merge"}, {"a", m.a}, {"b", m.b}}; }
  json operator()(const curation::Split& s) const {
    return {{"type", "split"}, {"id", s.id}, {"members", s.members}, {"nameplate", s.nameplate}};
  }
  json operator()(const curation::Rename& r) const {
    return {{"type", "rename"}, {"id", r.id}, {"nameplate", r.nameplate}};
  }
  json operator()(const curation::AttachGesture& g) const {
    return {{"type", "attach_gesture"}, {"id", g.id}, {"gesture_id", g.gesture_id}};
  }
  json operator()(const curation::AddRule& a) const { return {{"type", "add_rule"}, {"rule", to_json(a.rule)}}; }
  json operator()(const curation::RemoveRule& r) const { return {{"type", "remove_rule"}, {"rule_id", r.rule_id}}; }
  json operator()(const curation::MoveSeed& m) const {
    return {{"type", "move_seed"}, {"phrase_id", m.phrase_id}, {"from", m.from}, {"to", m.to}};
  }
};

json state_to_json(const ConceptState& state) {
  json concepts = json::array();
  for (const auto& c : state.concepts) concepts.push_back(to_json(c));
  json rules = json::array();
  for (const auto& r : state.rules) rules.push_back(to_json(r));
  return {{"concepts", std::move(concepts)},
          {"rules", std::move(rules)},
          {"next_concept", state.next_concept},
          {"next_rule", state.next_rule}};
}

Concept concept_from_json(const json& doc) {
  Concept c;
  c.id = doc.at("id").get<std::string>();
  c.nameplate = doc.at("nameplate").get<std::string>();
  for (const auto& s : doc.at("seeds")) c.seeds.push_back({s.at("id").get<std::string>(), s.at("text").get<std::string>()});
  c.centroid = doc.at("centroid").get<Vector>();
  c.gesture_ids = doc.value("gesture_ids", std::vector<std::string>{});
  c.provenance = parse_provenance(doc.value("provenance", std::string("auto")));
  return c;
}

ConceptState state_from_json(const json& doc) {
  ConceptState state;
  for (const auto& c : doc.at("concepts")) state.concepts.push_back(concept_from_json(c));
  for (const auto& r : doc.at("rules")) state.rules.push_back(rule_from_json(r));
  state.next_concept = doc.at("next_concept").get<std::size_t>();
  state.next_rule = doc.at("next_rule").get<std::size_t>();
  return state;
}

json store_document(const ConceptSet& set, bool with_timestamps) {
  json log = json::array();
  for (const auto& entry : set.log()) {
    json e = {{"seq", entry.seq}, {"action", to_json(entry.action)}};
    if (with_timestamps) e["timestamp"] = entry.timestamp;
    log.push_back(std::move(e));
  }
  json doc = state_to_json(set.state());
  doc["version"] = kConceptStoreVersion;
  doc["dim"] = set.dim();
  doc["base"] = state_to_json(set.base());
  doc["curation_log"] = std::move(log);
  return doc;
}

}  // namespace

json to_json(const CurationAction& action) { return std::visit(ActionWriter{}, action); }

json to_json(const ConceptSet& set) { return store_document(set, true); }

std::string canonical_store_text(const ConceptSet& set) { return store_document(set, false).dump(2); }

OverrideRule rule_from_json(const json& doc) {
  try {
    OverrideRule r;
    r.id = doc.value("id", std::string());
    r.kind = parse_match_kind(doc.value("match", std::string("exact")));
    r.surface = doc.at("surface").get<std::string>();
    r.target_concept_id = doc.at("target").get<std::string>();
    r.priority = doc.at("priority").get<int>();
    r.note = doc.value("note", std::string());
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidRule, std::string("rule document: ") + e.what());
  }
}

CurationAction action_from_json(const json& doc) {
  try {
    const auto type = doc.at("type").get<std::string>();
    if (type == "merge") return curation::Merge{doc.at("a").get<std::string>(), doc.at("b").get<std::string>()};
    if (type == "split") {
      return curation::Split{doc.at("id").get<std::string>(), doc.at("members").get<std::vector<std::string>>(),
                             doc.value("nameplate", std::string())};
    }
    if (type == "rename") return curation::Rename{doc.at("id").get<std::string>(), doc.at("nameplate").get<std::string>()};
    if (type == "attach_gesture") {
      return curation::AttachGesture{doc.at("id").get<std::string>(), doc.at("gesture_id").get<std::string>()};
    }
    if (type == "add_rule") return curation::AddRule{rule_from_json(doc.at("rule"))};
    if (type == "remove_rule") return curation::RemoveRule{doc.at("rule_id").get<std::string>()};
    if (type == "move_seed") {
      return curation::MoveSeed{doc.at("phrase_id").get<std::string>(), doc.at("from").get<std::string>(),
                                doc.at("to").get<std::string>()};
    }
    throw Error(ErrorCode::ParseError, "unknown curation action '" + type + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("curation action: ") + e.what());
  }
}

ConceptSet concept_set_from_json(const json& doc) {
  try {
    const int version = doc.at("version").get<int>();
    if (version != kConceptStoreVersion) {
      throw Error(ErrorCode::StoreCorrupt, "unsupported concept store version " + std::to_string(version));
    }
    const auto dim = doc.at("dim").get<std::size_t>();
    ConceptState state = state_from_json(doc);
    ConceptState base = doc.contains("base") ? state_from_json(doc.at("base")) : state;
    std::vector<LogEntry> log;
    for (const auto& e : doc.value("curation_log", json::array())) {
      log.push_back(LogEntry{e.at("seq").get<std::size_t>(), e.value("timestamp", std::string()),
                             action_from_json(e.at("action"))});
    }
    return ConceptSet::from_parts(dim, std::move(base), std::move(state), std::move(log));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::StoreCorrupt, std::string("concept store: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::StoreCorrupt) throw;
    throw Error(ErrorCode::StoreCorrupt, std::string("concept store: ") + e.what());
  }
}

void save_concept_store(const std::filesystem::path& path, const ConceptSet& set) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << to_json(set).dump(2) << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot replace " + path.string() + ": " + ec.message());
}

ConceptSet load_concept_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open concept store " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::StoreCorrupt, path.string() + ": " + e.what());
  }
  return concept_set_from_json(doc);
}

std::vector<OverrideRule> load_rules(const std::filesystem::path& path, const ConceptSet& concepts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open rules file " + path.string());
  std::vector<OverrideRule> rules;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string col; std::getline(ss, col, '\t');) cols.push_back(col);
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    if (cols.size() < 4) throw Error(ErrorCode::ParseError, where + "expected kind, surface, target, priority");
    OverrideRule rule;
    rule.kind = parse_match_kind(cols[0]);
    rule.surface = cols[1];
    const Concept* target = concepts.find(cols[2]);
    if (target == nullptr) target = concepts.find_by_nameplate(cols[2]);
    if (target == nullptr) throw Error(ErrorCode::UnknownId, where + "unknown target concept '" + cols[2] + "'");
    rule.target_concept_id = target->id;
    try {
      rule.priority = std::stoi(cols[3]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, where + "bad priority '" + cols[3] + "'");
    }
    if (cols.size() > 4) rule.note = cols[4];
    rules.push_back(std::move(rule));
  }
  return rules;
}

namespace {

std::string read_all(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, std::string("cannot open ") + what + " " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::stringstream ss(line);
  for (std::string col; std::getline(ss, col, '\t');) cols.push_back(col);
  return cols;
}

}  // namespace

LabelledCorpus parse_labelled_corpus(std::string_view text) {
  LabelledCorpus out;
  std::map<std::string, std::vector<std::string>> by_label;
  std::set<std::string> seen;
  std::stringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto cols = split_tabs(line);
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (cols.size() != 3) throw Error(ErrorCode::ParseError, where + "expected id, text, nameplate");
    if (cols[0].empty() || cols[2].empty()) throw Error(ErrorCode::ParseError, where + "empty id or nameplate");
    if (!seen.insert(cols[0]).second) throw Error(ErrorCode::InvalidInput, where + "duplicate id '" + cols[0] + "'");
    out.phrases.push_back(RawPhrase{cols[0], cols[1]});
    by_label[cols[2]].push_back(cols[0]);
  }
  for (auto& [label, ids] : by_label) out.partition.clusters.push_back(ids);
  out.partition.canonicalize();
  for (const auto& cluster : out.partition.clusters) {
    for (const auto& [label, ids] : by_label) {
      if (std::find(ids.begin(), ids.end(), cluster.front()) != ids.end()) out.nameplates[cluster.front()] = label;
    }
  }
  return out;
}

LabelledCorpus load_labelled_corpus(const std::filesystem::path& path) {
  try {
    return parse_labelled_corpus(read_all(path, "labelled corpus"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::map<std::string, std::vector<std::string>> load_gesture_attachments(const std::filesystem::path& path) {
  std::map<std::string, std::vector<std::string>> out;
  std::stringstream in(read_all(path, "gesture attachment file"));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto cols = split_tabs(line);
    if (cols.size() != 2 || cols[0].empty()) {
      throw Error(ErrorCode::ParseError,
                  path.string() + ":" + std::to_string(line_no) + ": expected nameplate, gesture ids");
    }
    std::stringstream ids(cols[1]);
    auto& list = out[cols[0]];
    for (std::string id; ids >> id;) list.push_back(id);
  }
  return out;
}

}  // namespace gesturemap
