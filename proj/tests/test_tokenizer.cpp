#include <doctest.h>

#include <random>

#include "gesturemap/error.hpp"
#include "gesturemap/tokenizer.hpp"
#include "support.hpp"

using namespace gesturemap;

namespace {

std::vector<std::string> surfaces(const TokenList& t) {
  std::vector<std::string> out;
  for (const auto& tok : t.tokens) out.push_back(tok.surface);
  return out;
}

std::string tiled(const TokenList& t) {
  std::string out;
  for (const auto& p : t.pieces) out += p.text;
  return out;
}

Lexicon lexicon(std::initializer_list<const char*> words, std::initializer_list<const char*> stops = {}) {
  Lexicon lex;
  for (const char* w : words) lex.add(w, {});
  for (const char* s : stops) lex.add_stop(s);
  return lex;
}

using Strings = std::vector<std::string>;

}  // namespace

TEST_CASE("stoplist removes the polite auxiliary") {
  const auto t = tokenize("ありがとうございます", lexicon({"ありがとう"}, {"ございます"}));
  CHECK(surfaces(t) == Strings{"ありがとう"});
  CHECK(t.stops().size() == 1);
  CHECK(t.residue().empty());
}

TEST_CASE("sentence-final から is a stop") {
  CHECK(surfaces(tokenize("いいから", lexicon({"いい"}, {"から"}))) == Strings{"いい"});
}

TEST_CASE("empty text") {
  const auto t = tokenize("", lexicon({"a"}));
  CHECK(t.tokens.empty());
  CHECK(t.residue().empty());
  CHECK(t.pieces.empty());
}

TEST_CASE("slang entry keeps its surface and canonicalizes") {
  Lexicon lex;
  lex.add("あざ", {"ありがとう"}, TokenTag::Slang);
  lex.add_stop("ます");
  const auto t = tokenize("あざます", lex);
  REQUIRE(t.tokens.size() == 1);
  CHECK(t.tokens[0].surface == "あざ");
  CHECK(t.tokens[0].canonical == Strings{"ありがとう"});
  CHECK(t.tokens[0].tag == TokenTag::Slang);
  CHECK(canonical_stream(t, true) == Strings{"ありがとう"});
  CHECK(canonical_stream(t, false) == Strings{"あざ"});
  CHECK(canonical_stream(TokenList{}, true).empty());
  CHECK(canonical_stream(TokenList{}, false).empty());
}

TEST_CASE("longest match wins") {
  const auto t = tokenize("あざ", lexicon({"あ", "あざ"}));
  CHECK(surfaces(t) == Strings{"あざ"});
}

TEST_CASE("stoplist wins a tie of equal length") {
  Lexicon lex = lexicon({"から"}, {"から"});
  const auto t = tokenize("から", lex);
  CHECK(t.tokens.empty());
  CHECK(t.stops().size() == 1);
}

TEST_CASE("residue spans become tokens") {
  const auto t = tokenize("ヨッ卍 まじ", lexicon({"卍", "まじ"}));
  CHECK(surfaces(t) == Strings{"ヨッ", "卍", "まじ"});
  REQUIRE(t.residue().size() == 1);
  CHECK(t.residue()[0].text == "ヨッ");
  CHECK(t.tokens[0].residue);
  CHECK(t.tokens[0].canonical == Strings{"ヨッ"});
  CHECK(tiled(t) == "ヨッ卍 まじ");
}

TEST_CASE("multi-hop canonical chains resolve") {
  Lexicon lex;
  lex.add("万次", {"卍"}, TokenTag::Buzzword);
  lex.add("卍", {"最高"}, TokenTag::Buzzword);
  lex.add("最高", {});
  CHECK(lex.resolve("万次") == Strings{"最高"});
  const auto t = tokenize("万次", lex);
  REQUIRE(t.tokens.size() == 1);
  CHECK(t.tokens[0].canonical == Strings{"最高"});
}

TEST_CASE("one surface may canonicalize to several tokens") {
  Lexicon lex;
  lex.add("まじ卍", {"まじ", "最高"});
  CHECK(canonical_stream(tokenize("まじ卍", lex), true) == Strings{"まじ", "最高"});
}

TEST_CASE("cycles and overlong chains are rejected") {
  Lexicon cyc;
  cyc.add("a", {"b"});
  cyc.add("b", {"a"});
  CHECK_THROWS_AS(cyc.validate(), Error);
  try {
    cyc.resolve("a");
    FAIL("expected a cycle error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LexiconCycle);
  }

  Lexicon chain;
  chain.add("w0", {"w1"});
  chain.add("w1", {"w2"});
  chain.add("w2", {"w3"});
  CHECK(chain.resolve("w0") == Strings{"w3"});
  chain.add("w3", {"w4"});
  CHECK_THROWS_AS(chain.resolve("w0"), Error);
  CHECK_THROWS_AS(parse_lexicon("a\tb\nb\ta\n"), Error);
}

TEST_CASE("lexicon and stoplist files") {
  const Lexicon lex = parse_lexicon("# comment\nあざ\tありがとう\tslang\n卍\t最高\tbuzzword\nいい\t-\n");
  REQUIRE(lex.find("あざ") != nullptr);
  CHECK(lex.find("あざ")->tag == TokenTag::Slang);
  CHECK(lex.find("卍")->tag == TokenTag::Buzzword);
  CHECK(lex.find("いい")->canonical == Strings{"いい"});
  CHECK(lex.resolve("いい") == Strings{"いい"});
  CHECK_THROWS_AS(parse_lexicon("x\ty\tslangish\n"), Error);
  const Lexicon stops = parse_stoplist("# particles\nから\n\nます\n");
  CHECK(stops.is_stop("から"));
  CHECK(stops.is_stop("ます"));
  CHECK_FALSE(stops.is_stop("# particles"));
}

TEST_CASE("later lexicons override earlier entries") {
  Lexicon base = load_lexicon(support::common("lexicon_standard.tsv"));
  CHECK(base.resolve("あざ") == Strings{"あざ"});
  base.merge(load_lexicon(support::common("lexicon_slang.tsv")));
  CHECK(base.resolve("あざ") == Strings{"ありがとう"});
}

TEST_CASE("property: pieces tile the input") {
  std::mt19937_64 rng(11);
  Lexicon lex = load_lexicon(support::common("lexicon_standard.tsv"));
  lex.merge(load_stoplist(support::common("stoplist.txt")));
  lex.add("a", {});
  lex.add("ω", {});
  for (int i = 0; i < 5000; ++i) {
    const std::string s = support::random_text(rng);
    const auto t = tokenize(s, lex);
    CAPTURE(s);
    REQUIRE(tiled(t) == s);
    std::size_t at = 0;
    for (const auto& p : t.pieces) {
      REQUIRE(p.position == at);
      at += p.text.size();
    }
    for (const auto& tok : t.tokens) CHECK_FALSE(tok.canonical.empty());
  }
}

TEST_CASE("property: a stop entry leaves strings without it unchanged") {
  std::mt19937_64 rng(12);
  Lexicon lex = load_lexicon(support::common("lexicon_standard.tsv"));
  Lexicon with_stop = lex;
  with_stop.add_stop("とう");
  for (int i = 0; i < 3000; ++i) {
    const std::string s = support::random_text(rng);
    if (s.find("とう") != std::string::npos) continue;
    CHECK(surfaces(tokenize(s, lex)) == surfaces(tokenize(s, with_stop)));
  }
}

TEST_CASE("property: random acyclic lexicons resolve within the hop bound") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    // Words w0..w9 may only point at higher-numbered words, at most 3 levels up.
    Lexicon lex;
    std::uniform_int_distribution<int> jump(1, 3);
    std::map<int, int> depth;
    for (int w = 9; w >= 0; --w) {
      const int target = w + jump(rng);
      if (target > 9 || depth[target] >= 3 || rng() % 3 == 0) {
        lex.add("w" + std::to_string(w), {});
        depth[w] = 0;
      } else {
        lex.add("w" + std::to_string(w), {"w" + std::to_string(target)});
        depth[w] = depth[target] + 1;
      }
    }
    CHECK_NOTHROW(lex.validate());
    for (int w = 0; w <= 9; ++w) {
      const auto forms = lex.resolve("w" + std::to_string(w));
      REQUIRE(forms.size() == 1);
      const LexiconEntry* e = lex.find(forms[0]);
      REQUIRE(e != nullptr);
      CHECK((e->canonical.empty() || e->canonical == Strings{forms[0]}));
    }
  }
}
