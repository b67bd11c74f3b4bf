#include "gesturemap/evalstats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gesturemap/error.hpp"

namespace gesturemap {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string_view question_name(Question q) noexcept {
  switch (q) {
    case Question::Natural: return "Natural";
    case Question::Humanlike: return "Humanlike";
    case Question::Conscious: return "Conscious";
    case Question::Lifelike: return "Lifelike";
    case Question::Elegant: return "Elegant";
  }
  return "Natural";
}

Question parse_question(std::string_view name) {
  const auto n = lower(trim(name));
  for (auto q : kQuestions) {
    if (n == lower(question_name(q))) return q;
  }
  throw Error(ErrorCode::ParseError, "unknown survey question '" + std::string(name) + "'");
}

std::string_view condition_name(Condition c) noexcept { return c == Condition::Matched ? "Matched" : "Shuffled"; }

Condition parse_condition(std::string_view name) {
  const auto n = lower(trim(name));
  if (n == "matched") return Condition::Matched;
  if (n == "shuffled") return Condition::Shuffled;
  throw Error(ErrorCode::ParseError, "unknown survey condition '" + std::string(name) + "'");
}

std::vector<SurveyRecord> parse_survey(std::string_view text) {
  std::vector<SurveyRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string col; std::getline(ss, col, ',');) cols.emplace_back(trim(col));
    const std::string where = "survey line " + std::to_string(line_no) + ": ";
    if (!header_seen) {
      header_seen = true;
      if (cols.size() != 5 || lower(cols[0]) != "participant" || lower(cols[1]) != "question" ||
          lower(cols[2]) != "condition" || lower(cols[3]) != "clip" || lower(cols[4]) != "score") {
        throw Error(ErrorCode::ParseError, where + "expected header participant,question,condition,clip,score");
      }
      continue;
    }
    if (cols.size() != 5) throw Error(ErrorCode::ParseError, where + "expected 5 fields");
    SurveyRecord r;
    r.participant_id = cols[0];
    try {
      r.question = parse_question(cols[1]);
      r.condition = parse_condition(cols[2]);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, where + e.what());
    }
    auto parse_int = [&](const std::string& s, int& v, const char* field) {
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::ParseError, where + "bad " + field + " '" + s + "'");
      }
    };
    parse_int(cols[3], r.clip_index, "clip");
    parse_int(cols[4], r.score, "score");
    if (r.score < 1 || r.score > 5) throw Error(ErrorCode::OutOfRange, where + "score must be in 1..5");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SurveyRecord> load_survey(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open survey " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_survey(ss.str());
}

std::map<CellKey, int> aggregate(const std::vector<SurveyRecord>& records, std::size_t clips_per_cell) {
  std::map<CellKey, int> sums;
  std::map<CellKey, std::size_t> clips;
  std::set<std::tuple<std::string, Question, Condition, int>> seen;
  std::set<std::string> participants;
  for (const auto& r : records) {
    if (r.score < 1 || r.score > 5) throw Error(ErrorCode::OutOfRange, "score must be in 1..5");
    if (!seen.emplace(r.participant_id, r.question, r.condition, r.clip_index).second) {
      throw Error(ErrorCode::InvalidInput, "duplicate record for participant " + r.participant_id + ", " +
                                               std::string(question_name(r.question)) + ", " +
                                               std::string(condition_name(r.condition)) + ", clip " +
                                               std::to_string(r.clip_index));
    }
    participants.insert(r.participant_id);
    const CellKey key{r.participant_id, r.question, r.condition};
    sums[key] += r.score;
    ++clips[key];
  }

  std::vector<std::string> incomplete;
  for (const auto& p : participants) {
    for (auto q : kQuestions) {
      for (auto c : {Condition::Matched, Condition::Shuffled}) {
        const CellKey key{p, q, c};
        const auto it = clips.find(key);
        const std::size_t have = it == clips.end() ? 0 : it->second;
        if (have != clips_per_cell) {
          incomplete.push_back(p + "/" + std::string(question_name(q)) + "/" + std::string(condition_name(c)) + " (" +
                               std::to_string(have) + " of " + std::to_string(clips_per_cell) + " clips)");
        }
      }
    }
  }
  if (!incomplete.empty()) {
    std::string msg = "incomplete survey cells:";
    for (const auto& cell : incomplete) msg += " " + cell + ";";
    throw Error(ErrorCode::IncompleteData, msg);
  }
  return sums;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidInput, "paired samples differ in length");
  if (x.empty()) throw Error(ErrorCode::EmptyInput, "paired samples are empty");

  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - y[i];
    if (!std::isfinite(diff)) throw Error(ErrorCode::InvalidInput, "non-finite sample");
    if (diff != 0.0) d.push_back(diff);
  }
  WilcoxonResult out;
  out.n_effective = d.size();
  if (d.empty()) {
    out.all_zero = true;
    out.p = 1.0;
    return out;
  }
  const std::size_t n = d.size();

  // Doubled mid-ranks keep every rank sum integral.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return std::fabs(d[a]) < std::fabs(d[b]); });
  std::vector<std::uint64_t> rank2(n);
  std::vector<std::size_t> tie_sizes;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::fabs(d[order[j + 1]]) == std::fabs(d[order[i]])) ++j;
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = (i + 1) + (j + 1);
    tie_sizes.push_back(j - i + 1);
    i = j + 1;
  }
  std::uint64_t plus2 = 0;
  std::uint64_t total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += rank2[i];
    if (d[i] > 0) plus2 += rank2[i];
  }
  const std::uint64_t minus2 = total2 - plus2;
  const std::uint64_t w2 = std::min(plus2, minus2);
  out.w_plus = static_cast<double>(plus2) / 2.0;
  out.w_minus = static_cast<double>(minus2) / 2.0;
  out.w = static_cast<double>(w2) / 2.0;

  if (n <= kExactWilcoxonLimit) {
    // counts[s]: sign assignments whose doubled positive-rank sum is s.
    std::vector<std::uint64_t> counts(total2 + 1, 0);
    counts[0] = 1;
    std::uint64_t reach = 0;
    for (std::size_t i = 0; i < n; ++i) {
      reach += rank2[i];
      for (std::uint64_t s = reach; s >= rank2[i]; --s) {
        counts[s] += counts[s - rank2[i]];
        if (s == rank2[i]) break;
      }
    }
    std::uint64_t tail = 0;
    for (std::uint64_t s = 0; s <= w2; ++s) tail += counts[s];
    const double one_tail = static_cast<double>(tail) / std::ldexp(1.0, static_cast<int>(n));
    out.p = std::min(1.0, 2.0 * one_tail);
    out.exact = true;
    return out;
  }

  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  double variance = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
  for (auto t : tie_sizes) {
    const double tt = static_cast<double>(t);
    variance -= (tt * tt * tt - tt) / 48.0;
  }
  const double z = std::max(0.0, std::fabs(out.w - mean) - 0.5) / std::sqrt(variance);
  out.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  out.exact = false;
  return out;
}

std::vector<double> bh_adjust(std::span<const double> p_values) {
  const std::size_t m = p_values.size();
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::OutOfRange, "p values must lie in [0, 1]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p_values[a] < p_values[b]; });
  std::vector<double> adjusted(m);
  double running = 1.0;
  for (std::size_t k = m; k-- > 0;) {
    const double scaled = p_values[order[k]] * (static_cast<double>(m) / static_cast<double>(k + 1));
    running = std::min(running, std::min(1.0, scaled));
    adjusted[order[k]] = running;
  }
  return adjusted;
}

std::vector<ContrastResult> run_contrasts(const std::vector<SurveyRecord>& records, double alpha,
                                          std::size_t clips_per_cell) {
  const auto sums = aggregate(records, clips_per_cell);
  std::set<std::string> participants;
  for (const auto& [key, _] : sums) participants.insert(std::get<0>(key));

  std::vector<ContrastResult> out;
  std::vector<double> raw;
  for (auto q : kQuestions) {
    std::vector<double> matched;
    std::vector<double> shuffled;
    for (const auto& p : participants) {
      matched.push_back(sums.at({p, q, Condition::Matched}));
      shuffled.push_back(sums.at({p, q, Condition::Shuffled}));
    }
    ContrastResult r;
    r.question = q;
    if (!participants.empty()) {
      const auto w = wilcoxon_signed_rank(matched, shuffled);
      r.n_effective = w.n_effective;
      r.w = w.w;
      r.p_raw = w.p;
    }
    raw.push_back(r.p_raw);
    out.push_back(r);
  }
  const auto adjusted = bh_adjust(raw);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].p_adjusted = std::max(adjusted[i], out[i].p_raw);
    out[i].significant = out[i].p_adjusted < alpha;
  }
  return out;
}

std::string format_report(const std::vector<ContrastResult>& results) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %4s %8s %10s %10s %s\n", "question", "n", "W", "p_raw", "p_adj", "significant");
  out += line;
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-10s %4zu %8.1f %10.6f %10.6f %s\n", std::string(question_name(r.question)).c_str(),
                  r.n_effective, r.w, r.p_raw, r.p_adjusted, r.significant ? "yes" : "no");
    out += line;
  }
  return out;
}

nlohmann::json to_json(const std::vector<ContrastResult>& results) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : results) {
    rows.push_back({{"question", question_name(r.question)},
                    {"n", r.n_effective},
                    {"W", r.w},
                    {"p_raw", r.p_raw},
                    {"p_adj", r.p_adjusted},
                    {"significant", r.significant}});
  }
  return rows;
}

}  // namespace gesturemap
