#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "gesturemap/embeddings.hpp"
#include "gesturemap/error.hpp"
#include "support.hpp"

using namespace gesturemap;

namespace {

VectorStore store_ab() { return parse_store("a 1 0\nb 0 1\n"); }

}  // namespace

TEST_CASE("loading a two-row store") {
  const auto s = store_ab();
  CHECK(s.dim == 2);
  CHECK(s.vectors.size() == 2);
  REQUIRE(s.find("a") != nullptr);
  CHECK(*s.find("a") == Vector{1, 0});
}

TEST_CASE("empty store takes the expected dimension") {
  std::vector<std::string> warnings;
  const auto s = parse_store("", 8, &warnings);
  CHECK(s.dim == 8);
  CHECK(s.vectors.empty());
  CHECK_FALSE(warnings.empty());
  CHECK_THROWS_AS(parse_store(""), Error);
}

TEST_CASE("row of the wrong length names its line") {
  try {
    parse_store("a 1 0\nb 0 1\nc 1 0 0\n");
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  try {
    parse_store("2 3\na 1 0\n");
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
  CHECK_THROWS_AS(parse_store("a 1 0\n", 3), Error);
}

TEST_CASE("bad numbers are parse errors") {
  try {
    parse_store("a 1 x\n");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_store("a nan 0\n"), Error);
  CHECK_THROWS_AS(parse_store("a inf 0\n"), Error);
}

TEST_CASE("duplicates keep the last row and warn") {
  std::vector<std::string> warnings;
  const auto s = parse_store("a 1 0\na 0 1\n", std::nullopt, &warnings);
  CHECK(*s.find("a") == Vector{0, 1});
  CHECK(warnings.size() == 1);
}

TEST_CASE("header line is optional") {
  const auto s = parse_store("2 2\na 1 0\nb 0 1\n");
  CHECK(s.dim == 2);
  CHECK(s.vectors.size() == 2);
}

TEST_CASE("phrase embedding examples") {
  VectorStore s = store_ab();
  auto one = embed_phrase({"a"}, {}, s);
  CHECK(one.v[0] == doctest::Approx(1.0));
  CHECK(one.v[1] == doctest::Approx(0.0));
  CHECK(one.covered == 1);

  auto two = embed_phrase({"a", "b"}, {}, s);
  CHECK(two.v[0] == doctest::Approx(0.7071).epsilon(1e-4));
  CHECK(std::fabs(two.v[0] - 0.7071) <= 1e-4);
  CHECK(std::fabs(two.v[1] - 0.7071) <= 1e-4);

  auto oov = embed_phrase({"zzz"}, {}, s);
  CHECK(oov.is_zero);
  CHECK(oov.covered == 0);
  CHECK(oov.missed == std::vector<std::string>{"zzz"});
  CHECK(oov.v == Vector{0, 0});

  VectorStore sym = parse_store("a 1 0\n");
  sym.symbol_vectors["🍀"] = {0, 1};
  auto mixed = embed_phrase({"a"}, {"🍀"}, sym, 0.5);
  // 0.5*(1,0) + 0.5*(0,1) = (0.5,0.5), normalized.
  CHECK(std::fabs(mixed.v[0] - std::sqrt(0.5)) <= 1e-6);
  CHECK(std::fabs(mixed.v[1] - std::sqrt(0.5)) <= 1e-6);

  auto symbol_only = embed_phrase({"zzz"}, {"🍀"}, sym, 0.2);
  CHECK(symbol_only.v[1] == doctest::Approx(1.0));
  auto weight_zero = embed_phrase({"a"}, {"🍀"}, sym, 0.0);
  CHECK(weight_zero.v[0] == doctest::Approx(1.0));
}

TEST_CASE("cosine conventions") {
  const Vector x{1, 0}, y{0, 1}, z{0, 0};
  CHECK(cosine(x, x) == doctest::Approx(1.0));
  CHECK(cosine(x, y) == doctest::Approx(0.0));
  CHECK(cosine(x, z) == 0.0);
  CHECK_THROWS_AS(cosine(x, Vector{1, 0, 0}), Error);
}

TEST_CASE("symbol vectors must match the store dimension") {
  support::TempDir dir;
  support::write_file(dir / "sym.txt", "🍀 1 0 0\n");
  VectorStore s = store_ab();
  CHECK_THROWS_AS(load_symbol_vectors(s, dir / "sym.txt"), Error);
  support::write_file(dir / "sym.txt", "🍀 1 0\n");
  load_symbol_vectors(s, dir / "sym.txt");
  CHECK(s.find_symbol("🍀") != nullptr);
}

TEST_CASE("fixture stores load") {
  auto s = load_store(support::common("vectors.txt"));
  CHECK(s.dim == 8);
  load_symbol_vectors(s, support::common("symbol_vectors.txt"));
  CHECK(s.symbol_vectors.size() == 5);
}

TEST_CASE("property: unit norm whenever something is covered") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  VectorStore s;
  s.dim = 6;
  for (int i = 0; i < 20; ++i) {
    Vector v(6);
    for (auto& x : v) x = g(rng);
    s.vectors["t" + std::to_string(i)] = v;
  }
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::string> tokens;
    const int n = static_cast<int>(rng() % 5);
    for (int k = 0; k < n; ++k) tokens.push_back("t" + std::to_string(rng() % 25));
    const auto pv = embed_phrase(tokens, {}, s);
    if (pv.covered > 0) {
      CHECK(std::fabs(l2_norm(pv.v) - 1.0) <= 1e-9);
      CHECK_FALSE(pv.is_zero);
    } else {
      CHECK(pv.is_zero);
      CHECK(l2_norm(pv.v) == 0.0);
    }
    auto shuffled = tokens;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto again = embed_phrase(shuffled, {}, s);
    for (std::size_t k = 0; k < pv.v.size(); ++k) CHECK(std::fabs(pv.v[k] - again.v[k]) <= 1e-12);
  }
}

TEST_CASE("property: scaling one stored vector keeps single-token cosines") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  for (int trial = 0; trial < 300; ++trial) {
    VectorStore s;
    s.dim = 4;
    for (const char* t : {"a", "b"}) {
      Vector v(4);
      for (auto& x : v) x = g(rng);
      s.vectors[t] = v;
    }
    const double before = cosine(embed_phrase({"a"}, {}, s).v, embed_phrase({"b"}, {}, s).v);
    const double k = scale(rng);
    for (auto& x : s.vectors["a"]) x *= k;
    const double after = cosine(embed_phrase({"a"}, {}, s).v, embed_phrase({"b"}, {}, s).v);
    CHECK(std::fabs(before - after) <= 1e-9);
  }
}

TEST_CASE("property: cosine is symmetric and bounded") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 2000; ++trial) {
    Vector u(5), v(5);
    for (auto& x : u) x = g(rng);
    for (auto& x : v) x = g(rng);
    const double c = cosine(u, v);
    CHECK(c == cosine(v, u));
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
    CHECK(cosine(u, u) == doctest::Approx(1.0).epsilon(1e-12));
  }
}
