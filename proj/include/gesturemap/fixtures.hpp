#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gesturemap/clusterer.hpp"
#include "gesturemap/conceptspace.hpp"
#include "gesturemap/config.hpp"
#include "gesturemap/normalizer.hpp"

namespace gesturemap {

// A fixture is a directory holding case.toml (pipeline config plus optional
// concept seeds, gesture attachments and rules), corpus.tsv and expect.toml.

struct SeparateSets {
  std::vector<std::string> a;
  std::vector<std::string> b;
};

struct FixtureExpectation {
  std::optional<std::size_t> cluster_count;
  std::vector<SeparateSets> separate;              // no member of a shares a cluster with a member of b
  std::vector<std::vector<std::string>> together;  // all in one cluster
  std::optional<std::string> assign_all;           // every phrase gets this nameplate
  std::map<std::string, std::string> assign;       // id -> nameplate, "-" for unassigned
  std::map<std::string, std::string> reason;       // id -> rule | seed_exact | nearest | none
  std::map<std::string, std::string> preprocessed;
  std::optional<std::vector<std::string>> ranking;  // expected nameplates, most frequent first
  bool ranking_requires_gesture = true;

  bool needs_partition() const noexcept { return cluster_count || !separate.empty() || !together.empty(); }
  bool needs_concepts() const noexcept { return assign_all || !assign.empty() || !reason.empty() || ranking; }
};

struct FixtureCase {
  std::string name;
  std::string description;
  std::filesystem::path dir;
  std::vector<RawPhrase> phrases;
  PipelineConfig config;
  std::optional<std::filesystem::path> concepts;  // labelled seed corpus
  std::optional<std::filesystem::path> gestures;  // gesture attachments by nameplate
  std::optional<std::filesystem::path> rules;
  FixtureExpectation expect;
};

struct FixtureResult {
  std::string name;
  bool passed = false;
  std::vector<std::string> diffs;
  std::optional<Partition> partition;
  std::vector<Assignment> assignments;
  std::map<std::string, std::string> assigned_nameplates;  // id -> nameplate or "-"
  double seconds = 0.0;
};

/// Root used when none is given: $GESTUREMAP_FIXTURES, else the source tree's fixtures/.
std::filesystem::path default_fixture_root();

/// Case directories under root, sorted; directories without case.toml are skipped.
std::vector<std::string> list_fixtures(const std::filesystem::path& root);

/// Throws Error(UnknownFixture) for a missing case and Error(MalformedFixture)
/// when an expectation is unreadable or names a phrase outside the corpus.
FixtureCase load_fixture(const std::string& name, const std::filesystem::path& root = default_fixture_root());

/// Concept set for a case with a `concepts` entry, built with the case pipeline.
ConceptSet build_fixture_concepts(const FixtureCase& fixture, const Pipeline& pipeline, bool with_case_rules = true);

FixtureResult run_fixture(const FixtureCase& fixture);

}  // namespace gesturemap
