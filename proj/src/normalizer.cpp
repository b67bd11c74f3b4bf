#include "gesturemap/normalizer.hpp"

#include <unicode/uchar.h>
#include <unicode/uscript.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "gesturemap/error.hpp"
#include "gesturemap/utf8.hpp"

namespace gesturemap {

namespace detail {
extern const std::string_view kBuiltinEmojiInventory;
extern const std::string_view kBuiltinFacePartInventory;
}  // namespace detail

std::string_view run_kind_name(RunKind kind) noexcept {
  switch (kind) {
    case RunKind::Text: return "text";
    case RunKind::Emoji: return "emoji";
    case RunKind::Kaomoji: return "kaomoji";
    case RunKind::Emphasis: return "emphasis";
    case RunKind::Punct: return "punct";
  }
  return "text";
}

std::string_view mode_name(NormalizeMode mode) noexcept {
  return mode == NormalizeMode::Strip ? "strip" : "extract";
}

NormalizeMode parse_mode(std::string_view name) {
  if (name == "strip" || name == "Strip") return NormalizeMode::Strip;
  if (name == "extract" || name == "Extract") return NormalizeMode::Extract;
  throw Error(ErrorCode::InvalidInput, "unknown normalize mode '" + std::string(name) + "'");
}

std::vector<std::string> NormalizedPhrase::symbols() const {
  std::vector<std::string> out;
  for (const auto& run : runs) {
    if (run.is_symbol()) out.push_back(run.content);
  }
  return out;
}

std::string NormalizedPhrase::joined() const {
  std::string out;
  for (const auto& run : runs) out += run.content;
  return out;
}

// ---------------------------------------------------------------------------
// CodePointSet

void CodePointSet::add(char32_t first, char32_t last) {
  if (last < first) std::swap(first, last);
  auto it = std::lower_bound(ranges_.begin(), ranges_.end(), std::make_pair(first, first));
  it = ranges_.insert(it, {first, last});
  // Coalesce with neighbours (including adjacent ranges).
  std::vector<std::pair<char32_t, char32_t>> merged;
  merged.reserve(ranges_.size());
  for (const auto& r : ranges_) {
    if (!merged.empty() && r.first <= merged.back().second + 1) {
      merged.back().second = std::max(merged.back().second, r.second);
    } else {
      merged.push_back(r);
    }
  }
  ranges_ = std::move(merged);
}

bool CodePointSet::contains(char32_t cp) const noexcept {
  auto it = std::upper_bound(ranges_.begin(), ranges_.end(), cp,
                             [](char32_t v, const auto& r) { return v < r.first; });
  if (it == ranges_.begin()) return false;
  --it;
  return cp >= it->first && cp <= it->second;
}

namespace {

char32_t parse_hex(std::string_view s, std::size_t line_no) {
  uint32_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value, 16);
  if (ec != std::errc{} || ptr != s.data() + s.size() || value > 0x10FFFF) {
    throw Error(ErrorCode::ParseError,
                "inventory line " + std::to_string(line_no) + ": bad code point '" + std::string(s) + "'");
  }
  return static_cast<char32_t>(value);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

CodePointSet CodePointSet::parse(std::string_view text) {
  CodePointSet set;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (const auto dots = line.find(".."); dots != std::string_view::npos) {
      set.add(parse_hex(trim(line.substr(0, dots)), line_no), parse_hex(trim(line.substr(dots + 2)), line_no));
    } else {
      const char32_t cp = parse_hex(line, line_no);
      set.add(cp, cp);
    }
  }
  return set;
}

CodePointSet CodePointSet::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open inventory " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const SymbolInventory& SymbolInventory::builtin() {
  static const SymbolInventory inventory{CodePointSet::parse(detail::kBuiltinEmojiInventory),
                                         CodePointSet::parse(detail::kBuiltinFacePartInventory)};
  return inventory;
}

// ---------------------------------------------------------------------------
// Segmentation

namespace {

constexpr std::size_t kMaxKaomojiLength = 20;
constexpr std::size_t kMaxArmLength = 2;
constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);

constexpr char32_t kProlongedSound = U'ー';  // ー

bool is_punct_or_symbol(char32_t cp) {
  switch (u_charType(static_cast<UChar32>(cp))) {
    case U_DASH_PUNCTUATION:
    case U_START_PUNCTUATION:
    case U_END_PUNCTUATION:
    case U_CONNECTOR_PUNCTUATION:
    case U_OTHER_PUNCTUATION:
    case U_INITIAL_PUNCTUATION:
    case U_FINAL_PUNCTUATION:
    case U_MATH_SYMBOL:
    case U_CURRENCY_SYMBOL:
    case U_MODIFIER_SYMBOL:
    case U_OTHER_SYMBOL:
      return true;
    default:
      return false;
  }
}

bool is_emphasis_char(char32_t cp) {
  return is_punct_or_symbol(cp) || cp == kProlongedSound;
}

bool is_sentence_punct(char32_t cp) {
  switch (cp) {
    case U'!': case U'?': case U'.': case U',': case U';': case U':':
    case U'。': case U'、': case U'！': case U'？': case U'．':
    case U'，': case U'～': case U'〜': case U'…': case U'‥':
    case kProlongedSound:
      return true;
    default:
      return false;
  }
}

bool is_ideograph(char32_t cp) {
  return u_hasBinaryProperty(static_cast<UChar32>(cp), UCHAR_IDEOGRAPHIC);
}

bool is_kana(char32_t cp) {
  UErrorCode status = U_ZERO_ERROR;
  const UScriptCode script = uscript_getScript(static_cast<UChar32>(cp), &status);
  return U_SUCCESS(status) && (script == USCRIPT_HIRAGANA || script == USCRIPT_KATAKANA);
}

bool is_small_tsu(char32_t cp) { return cp == U'っ' || cp == U'ッ'; }

bool is_emoji_modifier(char32_t cp) {
  return cp == U'\uFE0F' || cp == U'\u20E3' || (cp >= 0x1F3FB && cp <= 0x1F3FF) ||
         (cp >= 0xE0020 && cp <= 0xE007F);
}

bool is_regional_indicator(char32_t cp) { return cp >= 0x1F1E6 && cp <= 0x1F1FF; }

int bracket_family(char32_t cp, bool& opener) {
  switch (cp) {
    case U'(': case U'（': opener = true; return 1;
    case U')': case U'）': opener = false; return 1;
    case U'[': opener = true; return 2;
    case U']': opener = false; return 2;
    case U'【': opener = true; return 3;
    case U'】': opener = false; return 3;
    default: return 0;
  }
}

bool is_bracket(char32_t cp) {
  bool opener = false;
  return bracket_family(cp, opener) != 0;
}

struct Slot {
  RunKind kind = RunKind::Text;
  std::size_t group = kUnassigned;
};

class Segmenter {
 public:
  Segmenter(const SymbolInventory& inventory, std::string_view text)
      : inventory_(inventory), text_(text), cps_(utf8::decode(text)), slots_(cps_.size()) {}

  std::vector<Run> run() {
    mark_emoji();
    mark_bracket_kaomoji();
    mark_face_part_kaomoji();
    mark_emphasis_and_punct();
    return collect();
  }

 private:
  bool free(std::size_t i) const { return slots_[i].group == kUnassigned; }

  void assign(std::size_t first, std::size_t last, RunKind kind) {
    const std::size_t g = next_group_++;
    for (std::size_t i = first; i <= last; ++i) slots_[i] = Slot{kind, g};
  }

  bool emoji(char32_t cp) const { return inventory_.emoji.contains(cp); }

  // Characters a kaomoji may be built from.
  bool face_eligible(char32_t cp) const {
    if (utf8::is_space(cp) || emoji(cp)) return false;
    if (inventory_.face_parts.contains(cp)) return true;
    if (is_ideograph(cp)) return false;
    if (is_kana(cp) && !is_small_tsu(cp)) return false;
    return true;
  }

  bool face_part(char32_t cp) const { return inventory_.face_parts.contains(cp); }

  bool has_word(std::size_t first, std::size_t last) const {
    std::size_t alpha_run = 0;
    for (std::size_t i = first; i <= last; ++i) {
      alpha_run = u_isalpha(static_cast<UChar32>(cps_[i].value)) ? alpha_run + 1 : 0;
      if (alpha_run >= 3) return true;
    }
    return false;
  }

  // "#", "*" or a digit followed by an optional FE0F and U+20E3; returns the last index.
  std::size_t keycap(std::size_t i) const {
    const char32_t cp = cps_[i].value;
    if (!(cp == U'#' || cp == U'*' || (cp >= U'0' && cp <= U'9'))) return kUnassigned;
    std::size_t j = i + 1;
    if (j < cps_.size() && cps_[j].value == U'\uFE0F') ++j;
    if (j < cps_.size() && cps_[j].value == U'\u20E3') return j;
    return kUnassigned;
  }

  void mark_emoji() {
    for (std::size_t i = 0; i < cps_.size();) {
      const char32_t cp = cps_[i].value;
      if (const std::size_t keycap_end = keycap(i); keycap_end != kUnassigned) {
        assign(i, keycap_end, RunKind::Emoji);
        i = keycap_end + 1;
        continue;
      }
      if (!emoji(cp)) {
        ++i;
        continue;
      }
      std::size_t end = i;
      if (is_regional_indicator(cp) && end + 1 < cps_.size() && is_regional_indicator(cps_[end + 1].value)) {
        ++end;
      } else {
        for (;;) {
          const std::size_t next = end + 1;
          if (next >= cps_.size()) break;
          const char32_t n = cps_[next].value;
          if (is_emoji_modifier(n) && emoji(n)) {
            end = next;
          } else if (n == U'\u200D' && emoji(n) && next + 1 < cps_.size() && emoji(cps_[next + 1].value)) {
            end = next + 1;
          } else {
            break;
          }
        }
      }
      assign(i, end, RunKind::Emoji);
      i = end + 1;
    }
  }

  // Finds the bracket matching the opener at `open`, or kUnassigned.
  std::size_t matching_close(std::size_t open) const {
    bool opener = false;
    const int family = bracket_family(cps_[open].value, opener);
    int depth = 0;
    for (std::size_t j = open; j < cps_.size() && j - open + 1 <= kMaxKaomojiLength; ++j) {
      const char32_t cp = cps_[j].value;
      if (!free(j)) return kUnassigned;
      const bool inner_space = j != open && cp == U' ';
      if (!inner_space && !face_eligible(cp)) return kUnassigned;
      bool is_open = false;
      if (bracket_family(cp, is_open) == family) {
        depth += is_open ? 1 : -1;
        if (depth == 0) return j;
      }
    }
    return kUnassigned;
  }

  bool arm_char(std::size_t i) const {
    const char32_t cp = cps_[i].value;
    return free(i) && face_eligible(cp) && !is_sentence_punct(cp) && !is_bracket(cp);
  }

  void mark_bracket_kaomoji() {
    for (std::size_t i = 0; i < cps_.size(); ++i) {
      bool opener = false;
      if (!free(i) || bracket_family(cps_[i].value, opener) == 0 || !opener) continue;
      const std::size_t close = matching_close(i);
      if (close == kUnassigned || close == i + 1) continue;
      // The inside must look like a face, not a parenthesised word or number.
      bool all_plain = true;
      for (std::size_t k = i + 1; k < close; ++k) {
        const char32_t cp = cps_[k].value;
        if (!(cp < 0x80 && (std::isalnum(static_cast<int>(cp)) || cp == U' '))) all_plain = false;
      }
      if (all_plain || has_word(i + 1, close - 1)) continue;

      std::size_t first = i;
      std::size_t last = close;
      std::size_t left = 0;
      while (first - left > 0 && arm_char(first - left - 1)) ++left;
      if (left <= kMaxArmLength && (last - first + 1) + left <= kMaxKaomojiLength) first -= left;
      std::size_t right = 0;
      while (last + right + 1 < cps_.size() && arm_char(last + right + 1)) ++right;
      if (right <= kMaxArmLength && (last - first + 1) + right <= kMaxKaomojiLength) last += right;

      assign(first, last, RunKind::Kaomoji);
      i = last;
    }
  }

  void mark_face_part_kaomoji() {
    std::size_t i = 0;
    while (i < cps_.size()) {
      if (!free(i) || !face_eligible(cps_[i].value)) {
        ++i;
        continue;
      }
      std::size_t end = i;
      while (end + 1 < cps_.size() && free(end + 1) && face_eligible(cps_[end + 1].value)) ++end;
      const std::size_t next = end + 1;

      std::size_t first = i;
      std::size_t last = end;
      while (first <= last && is_sentence_punct(cps_[first].value)) ++first;
      while (last >= first && last != kUnassigned && is_sentence_punct(cps_[last].value)) --last;
      if (first <= last && last != kUnassigned && last - first + 1 <= kMaxKaomojiLength) {
        std::size_t parts = 0;
        bool repeated = true;
        for (std::size_t k = first; k <= last; ++k) {
          if (face_part(cps_[k].value)) ++parts;
          if (cps_[k].value != cps_[first].value) repeated = false;
        }
        if (parts >= 2 && !repeated && !has_word(first, last)) assign(first, last, RunKind::Kaomoji);
      }
      i = next;
    }
  }

  void mark_emphasis_and_punct() {
    std::size_t i = 0;
    while (i < cps_.size()) {
      const char32_t cp = cps_[i].value;
      if (!free(i) || !is_emphasis_char(cp)) {
        ++i;
        continue;
      }
      std::size_t end = i;
      while (end + 1 < cps_.size() && free(end + 1) && cps_[end + 1].value == cp) ++end;
      if (end > i) {
        assign(i, end, RunKind::Emphasis);
      } else if (cp != kProlongedSound) {
        assign(i, i, RunKind::Punct);
      }
      i = end + 1;
    }
  }

  std::vector<Run> collect() {
    std::vector<Run> runs;
    std::size_t i = 0;
    while (i < cps_.size()) {
      const Slot slot = slots_[i];
      std::size_t end = i;
      while (end + 1 < cps_.size() && slots_[end + 1].group == slot.group &&
             slots_[end + 1].kind == slot.kind) {
        ++end;
      }
      const std::size_t begin_byte = cps_[i].offset;
      const std::size_t end_byte = cps_[end].offset + cps_[end].length;
      runs.push_back(Run{slot.kind, std::string(text_.substr(begin_byte, end_byte - begin_byte)), begin_byte, false});
      i = end + 1;
    }
    return runs;
  }

  const SymbolInventory& inventory_;
  std::string_view text_;
  std::vector<utf8::CodePoint> cps_;
  std::vector<Slot> slots_;
  std::size_t next_group_ = 0;
};

}  // namespace

Normalizer::Normalizer() : inventory_(SymbolInventory::builtin()) {}

Normalizer::Normalizer(SymbolInventory inventory) : inventory_(std::move(inventory)) {}

NormalizedPhrase Normalizer::normalize(const RawPhrase& phrase, NormalizeMode mode) const {
  NormalizedPhrase out;
  out.source_id = phrase.id;
  out.runs = Segmenter(inventory_, phrase.text).run();
  if (mode == NormalizeMode::Strip) {
    for (auto& run : out.runs) run.dropped = run.kind != RunKind::Text;
  }
  return out;
}

NormalizedPhrase normalize(const RawPhrase& phrase, NormalizeMode mode) {
  static const Normalizer normalizer;
  return normalizer.normalize(phrase, mode);
}

std::string text_only(const NormalizedPhrase& phrase) {
  std::string joined;
  for (const auto& run : phrase.runs) {
    if (run.kind == RunKind::Text || (run.kind == RunKind::Punct && !run.dropped)) joined += run.content;
  }
  return utf8::collapse_whitespace(joined);
}

// ---------------------------------------------------------------------------
// Corpus files

std::vector<RawPhrase> parse_corpus(std::string_view text) {
  std::vector<RawPhrase> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    if (!utf8::is_valid(line)) {
      throw Error(ErrorCode::ParseError, "corpus line " + std::to_string(line_no) + ": invalid UTF-8");
    }
    RawPhrase phrase;
    if (const auto tab = line.find('\t'); tab != std::string_view::npos) {
      phrase.id = std::string(trim(line.substr(0, tab)));
      phrase.text = std::string(line.substr(tab + 1));
    } else {
      phrase.id = "p" + std::to_string(line_no);
      phrase.text = std::string(line);
    }
    if (phrase.id.empty()) {
      throw Error(ErrorCode::ParseError, "corpus line " + std::to_string(line_no) + ": empty id");
    }
    out.push_back(std::move(phrase));
  }
  std::vector<std::string> ids;
  for (const auto& p : out) ids.push_back(p.id);
  std::sort(ids.begin(), ids.end());
  if (auto dup = std::adjacent_find(ids.begin(), ids.end()); dup != ids.end()) {
    throw Error(ErrorCode::ParseError, "duplicate phrase id '" + *dup + "' in corpus");
  }
  return out;
}

std::vector<RawPhrase> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open corpus " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_corpus(ss.str());
}

}  // namespace gesturemap
