#include "gesturemap/fixtures.hpp"

#include <chrono>
#include <cstdlib>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "gesturemap/error.hpp"
#include "gesturemap/pipeline.hpp"

#ifndef GESTUREMAP_FIXTURE_DIR
#define GESTUREMAP_FIXTURE_DIR "fixtures"
#endif

namespace gesturemap {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void malformed(const std::string& name, const std::string& what) {
  throw Error(ErrorCode::MalformedFixture, "fixture '" + name + "': " + what);
}

std::vector<std::string> string_list(const toml::node* node, const std::string& name, const std::string& key) {
  const auto* arr = node ? node->as_array() : nullptr;
  if (arr == nullptr) malformed(name, "'" + key + "' must be a list of strings");
  std::vector<std::string> out;
  for (const auto& item : *arr) {
    auto s = item.value<std::string>();
    if (!s) malformed(name, "'" + key + "' must be a list of strings");
    out.push_back(*s);
  }
  return out;
}

std::map<std::string, std::string> string_map(const toml::node& node, const std::string& name,
                                              const std::string& key) {
  const auto* table = node.as_table();
  if (table == nullptr) malformed(name, "'" + key + "' must be a table");
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : *table) {
    auto s = v.value<std::string>();
    if (!s) malformed(name, "'" + key + "." + std::string(k.str()) + "' must be a string");
    out.emplace(std::string(k.str()), *s);
  }
  return out;
}

FixtureExpectation parse_expectation(const toml::table& doc, const std::string& name) {
  FixtureExpectation e;
  for (const auto& [key, node] : doc) {
    const std::string k(key.str());
    if (k == "cluster_count") {
      auto v = node.value<int64_t>();
      if (!v || *v < 1) malformed(name, "'cluster_count' must be a positive integer");
      e.cluster_count = static_cast<std::size_t>(*v);
    } else if (k == "assign_all") {
      auto v = node.value<std::string>();
      if (!v) malformed(name, "'assign_all' must be a nameplate");
      e.assign_all = *v;
    } else if (k == "separate") {
      const auto* arr = node.as_array();
      if (arr == nullptr) malformed(name, "'separate' must be an array of tables");
      for (const auto& item : *arr) {
        const auto* t = item.as_table();
        if (t == nullptr) malformed(name, "'separate' entries must be tables");
        e.separate.push_back({string_list(t->get("a"), name, "separate.a"), string_list(t->get("b"), name, "separate.b")});
      }
    } else if (k == "together") {
      const auto* arr = node.as_array();
      if (arr == nullptr) malformed(name, "'together' must be an array of tables");
      for (const auto& item : *arr) {
        const auto* t = item.as_table();
        if (t == nullptr) malformed(name, "'together' entries must be tables");
        e.together.push_back(string_list(t->get("ids"), name, "together.ids"));
      }
    } else if (k == "assign") {
      e.assign = string_map(node, name, k);
    } else if (k == "reason") {
      e.reason = string_map(node, name, k);
      for (const auto& [id, why] : e.reason) {
        if (why != "rule" && why != "seed_exact" && why != "nearest" && why != "none") {
          throw Error(ErrorCode::MalformedFixture, name + ": reason for " + id + " must be rule, seed_exact, nearest or none");
        }
      }
    } else if (k == "preprocessed") {
      e.preprocessed = string_map(node, name, k);
    } else if (k == "ranking") {
      const auto* t = node.as_table();
      if (t == nullptr) malformed(name, "'ranking' must be a table");
      e.ranking = string_list(t->get("top"), name, "ranking.top");
      if (const auto* rg = t->get("require_gesture")) {
        auto b = rg->value<bool>();
        if (!b) malformed(name, "'ranking.require_gesture' must be a boolean");
        e.ranking_requires_gesture = *b;
      }
    } else {
      malformed(name, "unknown expectation '" + k + "'");
    }
  }
  return e;
}

void check_ids(const FixtureCase& c) {
  std::set<std::string> ids;
  for (const auto& p : c.phrases) ids.insert(p.id);
  auto need = [&](const std::string& id, const char* where) {
    if (!ids.count(id)) malformed(c.name, std::string(where) + " references unknown phrase '" + id + "'");
  };
  const auto& e = c.expect;
  for (const auto& s : e.separate) {
    for (const auto& id : s.a) need(id, "separate");
    for (const auto& id : s.b) need(id, "separate");
  }
  for (const auto& t : e.together) {
    for (const auto& id : t) need(id, "together");
  }
  for (const auto& [id, _] : e.assign) need(id, "assign");
  for (const auto& [id, _] : e.reason) need(id, "reason");
  for (const auto& [id, _] : e.preprocessed) need(id, "preprocessed");
  if (e.needs_concepts() && !c.concepts) malformed(c.name, "assignment expectations need a 'concepts' file");
  if (!e.needs_partition() && !e.needs_concepts() && e.preprocessed.empty()) {
    malformed(c.name, "expect.toml states no expectation");
  }
}

std::optional<fs::path> optional_path(const toml::table& doc, const char* key, const fs::path& dir,
                                      const std::string& name) {
  const auto* node = doc.get(key);
  if (node == nullptr) return std::nullopt;
  auto s = node->value<std::string>();
  if (!s) malformed(name, std::string("'") + key + "' must be a path");
  return (dir / *s).lexically_normal();
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return "[" + out + "]";
}

}  // namespace

fs::path default_fixture_root() {
  if (const char* env = std::getenv("GESTUREMAP_FIXTURES"); env != nullptr && *env != '\0') return env;
  return GESTUREMAP_FIXTURE_DIR;
}

std::vector<std::string> list_fixtures(const fs::path& root) {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root, ec)) {
    if (entry.is_directory() && fs::exists(entry.path() / "case.toml")) out.push_back(entry.path().filename().string());
  }
  if (ec) throw Error(ErrorCode::IoError, "cannot list fixtures in " + root.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

FixtureCase load_fixture(const std::string& name, const fs::path& root) {
  const fs::path dir = root / name;
  if (name.empty() || name.find('/') != std::string::npos || !fs::exists(dir / "case.toml")) {
    throw Error(ErrorCode::UnknownFixture, "no fixture named '" + name + "' under " + root.string());
  }
  FixtureCase c;
  c.name = name;
  c.dir = dir;
  try {
    const toml::table doc = toml::parse_file((dir / "case.toml").string());
    c.description = doc["description"].value_or(std::string());
    const auto* pipeline = doc.get_as<toml::table>("pipeline");
    if (pipeline == nullptr) malformed(name, "case.toml lacks a [pipeline] table");
    c.config = config_from_table(*pipeline, dir);
    c.concepts = optional_path(doc, "concepts", dir, name);
    c.gestures = optional_path(doc, "gestures", dir, name);
    c.rules = optional_path(doc, "rules", dir, name);
    const fs::path corpus = optional_path(doc, "corpus", dir, name).value_or(dir / "corpus.tsv");
    c.phrases = load_corpus(corpus);
    const toml::table expect = toml::parse_file((dir / "expect.toml").string());
    c.expect = parse_expectation(expect, name);
  } catch (const toml::parse_error& e) {
    malformed(name, std::string(e.description()) + " in " + (e.source().path ? *e.source().path : std::string("?")) +
                        " at line " + std::to_string(e.source().begin.line));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedFixture) throw;
    malformed(name, e.what());
  }
  check_ids(c);
  return c;
}

ConceptSet build_fixture_concepts(const FixtureCase& fixture, const Pipeline& pipeline, bool with_case_rules) {
  if (!fixture.concepts) malformed(fixture.name, "no 'concepts' file");
  const LabelledCorpus seeds = load_labelled_corpus(*fixture.concepts);
  BuildOptions options;
  options.provenance = Provenance::Manual;
  if (fixture.gestures) options.gestures = load_gesture_attachments(*fixture.gestures);
  ConceptSet set = build_concepts(seeds.partition, seeds.nameplates, seeds.phrases, embedder_for(pipeline), options);
  if (with_case_rules && fixture.rules) set = with_rules(set, load_rules(*fixture.rules, set));
  return set;
}

FixtureResult run_fixture(const FixtureCase& fixture) {
  const auto start = std::chrono::steady_clock::now();
  FixtureResult r;
  r.name = fixture.name;
  const auto& e = fixture.expect;
  auto pipeline = build_pipeline(fixture.config);

  if (!e.preprocessed.empty()) {
    for (const auto& p : fixture.phrases) {
      auto it = e.preprocessed.find(p.id);
      if (it == e.preprocessed.end()) continue;
      const std::string got = pipeline->trace(p).text;
      if (got != it->second) r.diffs.push_back(p.id + ": preprocessed \"" + got + "\", expected \"" + it->second + "\"");
    }
  }

  if (e.needs_partition()) {
    const Partition part = cluster(pipeline->embed_all(fixture.phrases), fixture.config.theta);
    if (e.cluster_count && part.size() != *e.cluster_count) {
      r.diffs.push_back("cluster count " + std::to_string(part.size()) + ", expected " +
                        std::to_string(*e.cluster_count));
    }
    for (const auto& s : e.separate) {
      for (const auto& a : s.a) {
        for (const auto& b : s.b) {
          if (part.together(a, b)) r.diffs.push_back(a + " and " + b + " share a cluster");
        }
      }
    }
    for (const auto& t : e.together) {
      for (const auto& id : t) {
        if (!part.together(t.front(), id)) r.diffs.push_back(id + " is not clustered with " + t.front());
      }
    }
    r.partition = part;
  }

  if (e.needs_concepts()) {
    const ConceptSet set = build_fixture_concepts(fixture, *pipeline);
    for (const auto& p : fixture.phrases) {
      Assignment a = assign(p, set, set.rules(), fixture.config.tau, *pipeline);
      const Concept* c = a.concept_id ? set.find(*a.concept_id) : nullptr;
      r.assigned_nameplates[p.id] = c ? c->nameplate : "-";
      r.assignments.push_back(std::move(a));
    }
    auto check_assign = [&](const std::string& id, const std::string& expected) {
      const std::string& got = r.assigned_nameplates.at(id);
      if (got != expected) r.diffs.push_back(id + ": assigned " + got + ", expected " + expected);
    };
    if (e.assign_all) {
      for (const auto& p : fixture.phrases) check_assign(p.id, *e.assign_all);
    }
    for (const auto& [id, nameplate] : e.assign) check_assign(id, nameplate);
    for (std::size_t i = 0; i < fixture.phrases.size(); ++i) {
      auto it = e.reason.find(fixture.phrases[i].id);
      if (it == e.reason.end()) continue;
      const std::string got(reason_name(r.assignments[i].reason));
      if (got != it->second) r.diffs.push_back(it->first + ": reason " + got + ", expected " + it->second);
    }
    if (e.ranking) {
      std::vector<std::string> got;
      for (const auto& id : rank_concepts_by_frequency(r.assignments, set, e.ranking_requires_gesture)) {
        if (got.size() == e.ranking->size()) break;
        got.push_back(set.find(id)->nameplate);
      }
      if (got != *e.ranking) r.diffs.push_back("ranking " + join(got) + ", expected " + join(*e.ranking));
    }
  }

  r.passed = r.diffs.empty();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace gesturemap
