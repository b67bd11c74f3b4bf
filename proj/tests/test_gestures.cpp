#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "gesturemap/config.hpp"
#include "gesturemap/error.hpp"
#include "gesturemap/fixtures.hpp"
#include "gesturemap/gestures.hpp"
#include "support.hpp"

using namespace gesturemap;

namespace {

GestureCatalog small_catalog() {
  return parse_catalog("idle\tIdle\t1000\trest\ng1\tOne\t800\ta,b\ng2\tTwo\t900\t\ng3\tThree\t700\tc\n");
}

ConceptSet concepts_with(const std::vector<std::vector<std::string>>& gestures) {
  std::vector<RawPhrase> corpus;
  Partition p;
  BuildOptions options;
  std::map<std::string, std::string> names;
  for (std::size_t i = 0; i < gestures.size(); ++i) {
    const std::string id = "p" + std::to_string(i);
    corpus.push_back({id, "t" + std::to_string(i)});
    p.clusters.push_back({id});
    names[id] = "N" + std::to_string(i);
    options.gestures["N" + std::to_string(i)] = gestures[i];
  }
  p.canonicalize();
  const PhraseEmbedder embed = [](const RawPhrase& r) {
    PhraseVector v;
    v.source_id = r.id;
    v.v = {1.0, 0.0};
    v.covered = 1;
    return v;
  };
  return build_concepts(p, names, corpus, embed, options);
}

Assignment assigned_to(const std::string& concept_id, const std::string& phrase = "q") {
  Assignment a;
  a.phrase_id = phrase;
  a.concept_id = concept_id;
  a.similarity = 0.8;
  a.reason = AssignReason::Nearest;
  return a;
}

std::shared_ptr<const GestureMapper> fixture_mapper(const std::string& name, std::uint64_t seed = 0) {
  const auto fixture = load_fixture(name, support::fixture_root());
  auto pipeline = build_pipeline(fixture.config);
  auto concepts = std::make_shared<const ConceptSet>(build_fixture_concepts(fixture, *pipeline));
  auto catalog = std::make_shared<const GestureCatalog>(load_catalog(support::common("gestures.tsv")));
  return std::make_shared<const GestureMapper>(pipeline, concepts, catalog, MapperSettings{fixture.config.tau, seed, "idle"});
}

}  // namespace

TEST_CASE("catalog parsing") {
  const auto c = small_catalog();
  REQUIRE(c.gestures().size() == 4);
  CHECK(c.find("g1")->tags == std::vector<std::string>{"a", "b"});
  CHECK(c.find("g2")->tags.empty());
  CHECK(c.find("g1")->duration_ms == 800);
  CHECK_THROWS_AS(parse_catalog("g\tG\t0\t\n"), Error);
  CHECK_THROWS_AS(parse_catalog("g\tG\tlong\t\n"), Error);
  CHECK_THROWS_AS(parse_catalog("g\tG\t10\t\ng\tH\t10\t\n"), Error);
  CHECK(load_catalog(support::common("gestures.tsv")).find("idle") != nullptr);
}

TEST_CASE("select: single gesture, determinism and fallback") {
  const auto catalog = small_catalog();
  const auto set = concepts_with({{"g1"}, {"g1", "g2", "g3"}, {}});
  const auto one = select_gesture(assigned_to("C0001"), set, catalog, 42, "idle");
  CHECK(one.gesture_id == "g1");
  CHECK_FALSE(one.fallback);
  CHECK(one.duration_ms == 800);

  const auto first = select_gesture(assigned_to("C0002"), set, catalog, 42, "idle");
  const auto second = select_gesture(assigned_to("C0002"), set, catalog, 42, "idle");
  CHECK(first.gesture_id == second.gesture_id);
  CHECK(first.selection_seed == 42);
  const std::vector<std::string> allowed{"g1", "g2", "g3"};
  CHECK(std::find(allowed.begin(), allowed.end(), first.gesture_id) != allowed.end());

  const auto none = select_gesture(Assignment{}, set, catalog, 42, "idle");
  CHECK(none.gesture_id == "idle");
  CHECK(none.fallback);
  const auto bare = select_gesture(assigned_to("C0003"), set, catalog, 42, "idle");
  CHECK(bare.gesture_id == "idle");
  CHECK(bare.concept_id == std::optional<std::string>("C0003"));
}

TEST_CASE("select: every gesture of a concept is reachable across seeds") {
  const auto catalog = small_catalog();
  const auto set = concepts_with({{"g1", "g2", "g3"}});
  std::map<std::string, int> counts;
  for (std::uint64_t seed = 0; seed < 3000; ++seed) ++counts[select_gesture(assigned_to("C0001"), set, catalog, seed, "idle").gesture_id];
  REQUIRE(counts.size() == 3);
  for (const auto& [_, n] : counts) CHECK(n > 800);
}

TEST_CASE("select: unknown gestures") {
  const auto catalog = small_catalog();
  const auto set = concepts_with({{"g9"}});
  auto code_of = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidInput;
  };
  CHECK(code_of([&] { select_gesture(assigned_to("C0001"), set, catalog, 1, "idle"); }) == ErrorCode::UnknownGesture);
  CHECK(code_of([&] { select_gesture(Assignment{}, set, catalog, 1, "nowhere"); }) == ErrorCode::UnknownGesture);
}

TEST_CASE("map: fixture examples") {
  const auto mapper = fixture_mapper("thank_extract_symbols");
  const auto thank = map_phrase_to_gesture({"p1", "ありがとう🍀"}, *mapper);
  REQUIRE(thank.assignment.assigned());
  CHECK(mapper->concepts().find(*thank.assignment.concept_id)->nameplate == "Thank");
  CHECK((thank.cue.gesture_id == "bow" || thank.cue.gesture_id == "nod"));
  CHECK(thank.phrase.symbols == std::vector<std::string>{"🍀"});

  const auto empty = map_phrase_to_gesture({"p2", ""}, *mapper);
  CHECK_FALSE(empty.assignment.assigned());
  CHECK(empty.cue.gesture_id == "idle");
  CHECK(empty.cue.fallback);

  const auto rule_mapper = fixture_mapper("iikara_override");
  const auto iikara = map_phrase_to_gesture({"p3", "いいから。"}, *rule_mapper);
  REQUIRE(iikara.assignment.reason == AssignReason::Rule);
  const auto* reject = rule_mapper->concepts().find(*iikara.assignment.concept_id);
  CHECK(reject->nameplate == "Reject");
  CHECK(std::find(reject->gesture_ids.begin(), reject->gesture_ids.end(), iikara.cue.gesture_id) != reject->gesture_ids.end());

  const auto doc = to_json(iikara);
  CHECK(doc.contains("assignment"));
  CHECK(doc.contains("cue"));
}

TEST_CASE("property: mapping is deterministic and total") {
  const auto a = fixture_mapper("iikara_override", 9);
  const auto b = fixture_mapper("iikara_override", 9);
  std::mt19937_64 rng(17);
  for (int i = 0; i < 400; ++i) {
    const RawPhrase p{"r" + std::to_string(i), support::random_text(rng)};
    const auto x = a->map(p);
    const auto y = b->map(p);
    CHECK(to_json(x) == to_json(y));
    CHECK(a->catalog().find(x.cue.gesture_id) != nullptr);
    CHECK(x.cue.concept_id == x.assignment.concept_id);
  }
}

TEST_CASE("shuffle examples") {
  const std::vector<PhraseGesturePair> two{{"p1", "g1"}, {"p2", "g2"}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CHECK(shuffle_pairs(two, seed) == std::vector<PhraseGesturePair>{{"p1", "g2"}, {"p2", "g1"}});
  }
  try {
    shuffle_pairs({{"p1", "g1"}}, 1);
    FAIL("expected TooFewPairs");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewPairs);
  }
  CHECK_THROWS_AS(shuffle_pairs({}, 1), Error);
}

TEST_CASE("property: shuffles are derangements preserving the gesture multiset") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = trial < 100 ? 10 : 2 + rng() % 15;
    const std::size_t kinds = trial < 100 ? n : 1 + rng() % n;
    std::vector<PhraseGesturePair> pairs;
    for (std::size_t i = 0; i < n; ++i) pairs.push_back({"p" + std::to_string(i), "g" + std::to_string(i % kinds)});
    const std::uint64_t seed = rng();
    const auto out = shuffle_pairs(pairs, seed);
    CHECK(out == shuffle_pairs(pairs, seed));
    REQUIRE(out.size() == n);
    std::multiset<std::string> before, after;
    std::size_t max_count = 0;
    std::map<std::string, std::size_t> counts;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(out[i].first == pairs[i].first);
      before.insert(pairs[i].second);
      after.insert(out[i].second);
      max_count = std::max(max_count, ++counts[pairs[i].second]);
    }
    CHECK(before == after);
    if (2 * max_count <= n) {
      for (std::size_t i = 0; i < n; ++i) CHECK(out[i].second != pairs[i].second);
    }
  }
}

TEST_CASE("cue json") {
  GestureCue cue;
  cue.phrase_id = "p";
  cue.gesture_id = "idle";
  cue.fallback = true;
  const auto doc = to_json(cue);
  CHECK(doc["phrase_id"] == "p");
  CHECK(doc["gesture_id"] == "idle");
  CHECK(doc["concept_id"].is_null());
}
