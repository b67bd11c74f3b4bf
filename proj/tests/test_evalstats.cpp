#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gesturemap/error.hpp"
#include "gesturemap/evalstats.hpp"
#include "oracles/oracles.hpp"

using namespace gesturemap;

namespace {

std::vector<double> diffs_of(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i) d.push_back(x[i] - y[i]);
  return d;
}

WilcoxonResult test_d(const std::vector<double>& d) {
  const std::vector<double> zeros(d.size(), 0.0);
  return wilcoxon_signed_rank(d, zeros);
}

std::vector<SurveyRecord> survey(int participants, const std::map<Question, int>& lift, std::mt19937_64& rng) {
  std::vector<SurveyRecord> out;
  std::uniform_int_distribution<int> base(1, 3);
  for (int p = 1; p <= participants; ++p) {
    for (Question q : kQuestions) {
      for (int clip = 1; clip <= 2; ++clip) {
        const int s = base(rng);
        const auto it = lift.find(q);
        const int add = it == lift.end() ? 0 : it->second;
        out.push_back({"P" + std::to_string(p), q, Condition::Shuffled, clip, s});
        out.push_back({"P" + std::to_string(p), q, Condition::Matched, clip, std::min(5, s + add)});
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("oracle sanity") {
  CHECK(oracle::wilcoxon_p({1, 2, 3, 4, 5}) == 0.0625);
  CHECK(oracle::wilcoxon_p({}) == 1.0);
  for (double x : oracle::bh({0.01, 0.02, 0.03, 0.04, 0.05})) CHECK(x == doctest::Approx(0.05).epsilon(1e-15));
}

TEST_CASE("wilcoxon examples") {
  const std::vector<double> x{1, 2, 3};
  const auto same = wilcoxon_signed_rank(x, x);
  CHECK(same.all_zero);
  CHECK(same.p == 1.0);
  CHECK(same.n_effective == 0);

  const auto five = test_d({1, 2, 3, 4, 5});
  CHECK(five.p == 0.0625);
  CHECK(five.w == 0.0);
  CHECK(five.w_plus == 15.0);
  CHECK(five.n_effective == 5);
  CHECK(five.exact);

  const auto three = test_d({3, -1, 2});
  CHECK(three.p == oracle::wilcoxon_p({3, -1, 2}));
  CHECK(three.w_plus == 5.0);
  CHECK(three.w_minus == 1.0);

  CHECK_THROWS_AS(wilcoxon_signed_rank(std::vector<double>{1, 2}, std::vector<double>{1}), Error);
  CHECK_THROWS_AS(wilcoxon_signed_rank(std::vector<double>{}, std::vector<double>{}), Error);
}

TEST_CASE("wilcoxon zero differences reduce n") {
  const auto r = test_d({0, 0, 1, 2, 3, 4, 5});
  CHECK(r.n_effective == 5);
  CHECK(r.p == 0.0625);
}

TEST_CASE("property: exact wilcoxon equals the enumeration oracle") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<double> x(n), y(n);
    std::uniform_int_distribution<int> score(2, 10);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = score(rng);
      y[i] = score(rng);
    }
    const auto r = wilcoxon_signed_rank(x, y);
    CHECK(std::fabs(r.p - oracle::wilcoxon_p(diffs_of(x, y))) <= 1e-12);
    CHECK(r.p >= 0.0);
    CHECK(r.p <= 1.0);
  }
}

TEST_CASE("property: shift invariance and antisymmetry") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> score(2, 10);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 15;
    std::vector<double> x(n), y(n), xs(n), ys(n);
    const double shift = std::uniform_int_distribution<int>(-5, 5)(rng);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = score(rng);
      y[i] = score(rng);
      xs[i] = x[i] + shift;
      ys[i] = y[i] + shift;
    }
    const auto a = wilcoxon_signed_rank(x, y);
    const auto b = wilcoxon_signed_rank(xs, ys);
    CHECK(a.w == b.w);
    CHECK(a.p == b.p);
    const auto swapped = wilcoxon_signed_rank(y, x);
    CHECK(swapped.w_plus == a.w_minus);
    CHECK(swapped.w_minus == a.w_plus);
    CHECK(swapped.p == a.p);
  }
}

TEST_CASE("normal approximation above the exact limit") {
  std::vector<double> d;
  for (int i = 1; i <= 25; ++i) d.push_back(i);
  const auto r = test_d(d);
  CHECK_FALSE(r.exact);
  CHECK(r.n_effective == 25);
  // W = 0, mean 162.5, variance 25*26*51/24 = 1381.25, continuity-corrected.
  const double z = (162.5 - 0.5) / std::sqrt(1381.25);
  CHECK(r.p == doctest::Approx(std::erfc(z / std::sqrt(2.0))).epsilon(1e-9));

  const auto exact20 = test_d(std::vector<double>(d.begin(), d.begin() + 20));
  CHECK(exact20.exact);
  CHECK(exact20.p == doctest::Approx(2.0 / 1048576.0).epsilon(1e-12));

  std::vector<double> mixed;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 40; ++i) mixed.push_back(std::uniform_int_distribution<int>(-4, 4)(rng));
  const auto m = test_d(mixed);
  CHECK(m.p >= 0.0);
  CHECK(m.p <= 1.0);
}

TEST_CASE("bh examples") {
  CHECK(bh_adjust(std::vector<double>{0.01, 0.02, 0.03, 0.04, 0.05}) == std::vector<double>(5, 0.05));
  CHECK(bh_adjust(std::vector<double>{0.5}) == std::vector<double>{0.5});
  CHECK(bh_adjust(std::vector<double>{}).empty());
  CHECK_THROWS_AS(bh_adjust(std::vector<double>{0.1, 1.5}), Error);
  CHECK_THROWS_AS(bh_adjust(std::vector<double>{-0.1}), Error);
  CHECK_THROWS_AS(bh_adjust(std::vector<double>{std::nan("")}), Error);
}

TEST_CASE("property: bh agrees with the definition and is monotone") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> p(1 + rng() % 12);
    for (auto& x : p) x = rng() % 4 == 0 ? 0.05 : u(rng);
    const auto adj = bh_adjust(p);
    const auto expected = oracle::bh(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(adj[i] == doctest::Approx(expected[i]).epsilon(1e-12));
      CHECK(adj[i] >= p[i]);
      CHECK(adj[i] <= 1.0);
      for (std::size_t j = 0; j < p.size(); ++j) {
        if (p[i] <= p[j]) CHECK(adj[i] <= adj[j]);
      }
    }
    // Re-adjusting can only raise values; adjusted lists that are already
    // constant at their largest-rank value are fixed points.
    const auto twice = bh_adjust(adj);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(twice[i] >= adj[i]);
  }
  const std::vector<double> flat(5, 0.05);
  CHECK(bh_adjust(flat) == flat);
  CHECK(bh_adjust(bh_adjust(std::vector<double>{0.01, 0.02, 0.03, 0.04, 0.05})) == flat);
  const std::vector<double> ones{1.0, 1.0, 1.0};
  CHECK(bh_adjust(ones) == ones);
}

TEST_CASE("aggregate examples") {
  std::vector<SurveyRecord> records;
  for (Question q : kQuestions) {
    for (Condition c : {Condition::Matched, Condition::Shuffled}) {
      for (int clip = 1; clip <= 2; ++clip) records.push_back({"1", q, c, clip, 1});
    }
  }
  records[0].score = 4;
  records[1].score = 5;
  const auto sums = aggregate(records);
  CHECK(sums.at({"1", Question::Natural, Condition::Matched}) == 9);
  CHECK(sums.at({"1", Question::Elegant, Condition::Shuffled}) == 2);
  CHECK(sums.size() == 10);

  auto missing = records;
  missing.pop_back();
  try {
    aggregate(missing);
    FAIL("expected IncompleteData");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IncompleteData);
    CHECK(std::string(e.what()).find("Elegant") != std::string::npos);
  }
  auto duplicate = records;
  duplicate.push_back(records.front());
  CHECK_THROWS_AS(aggregate(duplicate), Error);
}

TEST_CASE("survey csv parsing") {
  const auto r = parse_survey("participant,question,condition,clip,score\nP1,Natural,Matched,1,4\nP1,natural,shuffled,2,3\n");
  REQUIRE(r.size() == 2);
  CHECK(r[0].question == Question::Natural);
  CHECK(r[1].condition == Condition::Shuffled);
  CHECK(r[0].score == 4);
  CHECK_THROWS_AS(parse_survey("participant,question,condition,clip,score\nP1,Natural,Matched,1,6\n"), Error);
  CHECK_THROWS_AS(parse_survey("participant,question,condition,clip,score\nP1,Pretty,Matched,1,3\n"), Error);
  CHECK_THROWS_AS(parse_survey("who,what\n"), Error);
  try {
    parse_survey("participant,question,condition,clip,score\nP1,Natural,Matched,1,3\nP1,Natural,Matched,x,3\n");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
}

TEST_CASE("contrasts: constant lift on Natural is significant") {
  std::vector<SurveyRecord> records;
  for (int p = 1; p <= 13; ++p) {
    for (Question q : kQuestions) {
      for (int clip = 1; clip <= 2; ++clip) {
        const int s = 1 + (p + clip) % 3;
        records.push_back({"P" + std::to_string(p), q, Condition::Shuffled, clip, s});
        records.push_back({"P" + std::to_string(p), q, Condition::Matched, clip, q == Question::Natural ? s + 1 : s});
      }
    }
  }
  const auto results = run_contrasts(records);
  REQUIRE(results.size() == 5);
  CHECK(results[0].question == Question::Natural);
  CHECK(results[0].significant);
  CHECK(results[0].n_effective == 13);
  // All 13 differences equal +2: one extreme assignment per tail.
  CHECK(results[0].p_raw == doctest::Approx(2.0 / 8192.0).epsilon(1e-12));
  for (std::size_t i = 1; i < 5; ++i) {
    CHECK_FALSE(results[i].significant);
    CHECK(results[i].p_raw == 1.0);
  }
  for (const auto& r : results) {
    CHECK(r.p_raw <= r.p_adjusted);
    CHECK(r.p_adjusted <= 1.0);
    CHECK(r.significant == (r.p_adjusted < 0.05));
  }
  const auto report = format_report(results);
  std::istringstream lines(report);
  int count = 0;
  for (std::string line; std::getline(lines, line);) ++count;
  CHECK(count >= 6);
  CHECK(to_json(results).size() == 5);
}

TEST_CASE("contrasts: identical conditions flag nothing") {
  std::mt19937_64 rng(1);
  const auto results = run_contrasts(survey(13, {}, rng));
  for (const auto& r : results) CHECK_FALSE(r.significant);
}

TEST_CASE("property: random surveys keep p-value ordering invariants") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SurveyRecord> records;
    std::uniform_int_distribution<int> s(1, 5);
    for (int p = 1; p <= 13; ++p) {
      for (Question q : kQuestions) {
        for (Condition c : {Condition::Matched, Condition::Shuffled}) {
          for (int clip = 1; clip <= 2; ++clip) records.push_back({"P" + std::to_string(p), q, c, clip, s(rng)});
        }
      }
    }
    for (const auto& r : run_contrasts(records)) {
      CHECK(0.0 <= r.p_raw);
      CHECK(r.p_raw <= r.p_adjusted);
      CHECK(r.p_adjusted <= 1.0);
    }
  }
}
