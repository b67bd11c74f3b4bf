#include <doctest.h>

#include "gesturemap/config.hpp"
#include "gesturemap/error.hpp"
#include "gesturemap/pipeline.hpp"
#include "support.hpp"

using namespace gesturemap;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidInput;
}

}  // namespace

TEST_CASE("demo config loads with paths resolved next to the file") {
  const auto c = load_config(support::fixture_root() / "demo" / "config.toml");
  CHECK(c.mode == NormalizeMode::Extract);
  CHECK(c.lexicons.size() == 3);
  CHECK(c.stoplists.size() == 1);
  CHECK(std::filesystem::exists(c.vectors));
  CHECK(c.symbol_vectors.has_value());
  CHECK(c.seed == 7);
  CHECK(c.theta == 0.4);
  CHECK(c.tau == 0.5);
  CHECK(c.w_sym == 0.5);
  CHECK(c.fallback_gesture == "idle");
  REQUIRE(c.concept_store.has_value());
  CHECK(c.concept_store->filename() == "concepts.json");
  CHECK(std::filesystem::exists(*c.catalog));
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("defaults and single-string lists") {
  support::TempDir dir;
  support::write_file(dir / "v.txt", "a 1 0\n");
  support::write_file(dir / "lex.tsv", "a\t-\n");
  const auto c = parse_config("vectors = \"v.txt\"\nlexicons = \"lex.tsv\"\n", dir.path());
  CHECK(c.mode == NormalizeMode::Extract);
  CHECK(c.lexicons == std::vector<std::filesystem::path>{dir / "lex.tsv"});
  CHECK(c.use_canonical);
  CHECK(c.tau == kDefaultTau);
  CHECK(c.fallback_gesture == "idle");
  CHECK_FALSE(c.concept_store.has_value());
  const auto pipeline = build_pipeline(c);
  CHECK(pipeline->dim() == 2);
  CHECK(pipeline->embed(RawPhrase{"x", "a"}).covered == 1);
}

TEST_CASE("range checks") {
  support::TempDir dir;
  support::write_file(dir / "v.txt", "a 1 0\n");
  for (const char* bad : {"theta = 2.5", "theta = -0.1", "tau = 1.5", "tau = -1.0", "w_sym = 1.1"}) {
    CAPTURE(bad);
    CHECK(code_of([&] { parse_config(std::string("vectors = \"v.txt\"\n") + bad + "\n", dir.path()).validate(); }) ==
          ErrorCode::OutOfRange);
  }
  CHECK_NOTHROW(parse_config("vectors = \"v.txt\"\ntheta = 2.0\ntau = 0.0\nw_sym = 1.0\n", dir.path()).validate());
}

TEST_CASE("missing files, unknown keys and bad syntax") {
  support::TempDir dir;
  CHECK(code_of([&] { parse_config("vectors = \"nope.txt\"\n", dir.path()).validate(); }) == ErrorCode::IoError);
  CHECK_NOTHROW(parse_config("vectors = \"nope.txt\"\n", dir.path()).validate(false));
  CHECK(code_of([&] { parse_config("vectors = \"v.txt\"\nthetta = 0.3\n", dir.path()); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { parse_config("vectors = \n", dir.path()); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { parse_config("mode = \"shout\"\n", dir.path()); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { parse_config("theta = \"high\"\n", dir.path()); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { load_config(dir / "absent.toml"); }) == ErrorCode::IoError);
}

TEST_CASE("later lexicons override earlier ones") {
  support::TempDir dir;
  support::write_file(dir / "v.txt", "a 1 0\nb 0 1\n");
  support::write_file(dir / "one.tsv", "x\ta\n");
  support::write_file(dir / "two.tsv", "x\tb\n");
  const auto c = parse_config("vectors = \"v.txt\"\nlexicons = [\"one.tsv\", \"two.tsv\"]\n", dir.path());
  const auto trace = build_pipeline(c)->trace(RawPhrase{"p", "x"});
  CHECK(trace.stream == std::vector<std::string>{"b"});
}
