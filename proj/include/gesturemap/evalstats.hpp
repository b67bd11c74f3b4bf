#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

namespace gesturemap {

/// The five anthropomorphism items, scored Fake(1)..Natural(5) etc.
enum class Question { Natural, Humanlike, Conscious, Lifelike, Elegant };
enum class Condition { Matched, Shuffled };

inline constexpr std::array<Question, 5> kQuestions = {Question::Natural, Question::Humanlike, Question::Conscious,
                                                       Question::Lifelike, Question::Elegant};

std::string_view question_name(Question q) noexcept;
Question parse_question(std::string_view name);
std::string_view condition_name(Condition c) noexcept;
Condition parse_condition(std::string_view name);

struct SurveyRecord {
  std::string participant_id;
  Question question = Question::Natural;
  Condition condition = Condition::Matched;
  int clip_index = 0;
  int score = 0;  // 1..5
};

/// CSV with header "participant,question,condition,clip,score".
std::vector<SurveyRecord> parse_survey(std::string_view text);
std::vector<SurveyRecord> load_survey(const std::filesystem::path& path);

using CellKey = std::tuple<std::string, Question, Condition>;

/// Per (participant, question, condition) sum over clips. Every participant
/// must have `clips_per_cell` clips in all ten cells; otherwise throws
/// Error(IncompleteData) naming the incomplete cells.
std::map<CellKey, int> aggregate(const std::vector<SurveyRecord>& records, std::size_t clips_per_cell = 2);

struct WilcoxonResult {
  double w = 0.0;        // min(W+, W-)
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p = 1.0;        // two-tailed
  std::size_t n_effective = 0;  // pairs with a nonzero difference
  bool all_zero = false;        // no nonzero difference; p is 1 by definition
  bool exact = true;
};

/// Largest n solved exactly; above it the tie- and continuity-corrected normal
/// approximation is used.
inline constexpr std::size_t kExactWilcoxonLimit = 20;

/// Paired signed-rank test on d = x - y: zero differences dropped, mid-ranks
/// for ties, two-tailed p = min(1, 2 * P(W+ <= min(W+, W-))).
WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y);

/// Benjamini-Hochberg step-up adjustment, returned in input order.
std::vector<double> bh_adjust(std::span<const double> p_values);

struct ContrastResult {
  Question question = Question::Natural;
  std::size_t n_effective = 0;
  double w = 0.0;
  double p_raw = 1.0;
  double p_adjusted = 1.0;
  bool significant = false;
};

/// One Matched-vs-Shuffled test per question, BH across the five raw p values.
std::vector<ContrastResult> run_contrasts(const std::vector<SurveyRecord>& records, double alpha = 0.05,
                                          std::size_t clips_per_cell = 2);

std::string format_report(const std::vector<ContrastResult>& results);
nlohmann::json to_json(const std::vector<ContrastResult>& results);

}  // namespace gesturemap
