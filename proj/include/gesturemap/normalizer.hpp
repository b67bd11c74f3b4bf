#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gesturemap {

/// One chat phrase, the unit every pipeline stage works on.
struct RawPhrase {
  std::string id;
  std::string text;
};

enum class RunKind {
  Text,
  Emoji,
  Kaomoji,
  Emphasis,  // two or more identical punctuation/symbol code points, e.g. "!!!"
  Punct,     // a lone punctuation/symbol code point, e.g. "、" or "♪"
};

std::string_view run_kind_name(RunKind kind) noexcept;

struct Run {
  RunKind kind = RunKind::Text;
  std::string content;
  std::size_t position = 0;  // byte offset in the original text
  bool dropped = false;      // set by Strip mode on every non-Text run

  bool is_symbol() const noexcept {
    return kind == RunKind::Emoji || kind == RunKind::Kaomoji || kind == RunKind::Emphasis;
  }
  friend bool operator==(const Run&, const Run&) = default;
};

/// A phrase cut into non-overlapping runs whose contents, joined in order,
/// reproduce the source text byte for byte.
struct NormalizedPhrase {
  std::string source_id;
  std::vector<Run> runs;

  /// Contents of the non-Text, non-Punct runs in order (emoji, kaomoji, emphasis).
  std::vector<std::string> symbols() const;
  std::string joined() const;
};

enum class NormalizeMode { Strip, Extract };

std::string_view mode_name(NormalizeMode mode) noexcept;
NormalizeMode parse_mode(std::string_view name);

/// Sorted, coalesced set of inclusive code point ranges.
class CodePointSet {
 public:
  CodePointSet() = default;

  void add(char32_t first, char32_t last);
  bool contains(char32_t cp) const noexcept;
  std::size_t range_count() const noexcept { return ranges_.size(); }

  /// Parses the inventory format: one hex code point or "FIRST..LAST" range per
  /// line, "#" starts a comment.
  static CodePointSet parse(std::string_view text);
  static CodePointSet load(const std::filesystem::path& path);

 private:
  std::vector<std::pair<char32_t, char32_t>> ranges_;
};

struct SymbolInventory {
  CodePointSet emoji;
  CodePointSet face_parts;

  /// Inventories compiled in from data/emoji.txt and data/face_parts.txt.
  static const SymbolInventory& builtin();
};

class Normalizer {
 public:
  Normalizer();
  explicit Normalizer(SymbolInventory inventory);

  NormalizedPhrase normalize(const RawPhrase& phrase, NormalizeMode mode) const;

  const SymbolInventory& inventory() const noexcept { return inventory_; }

 private:
  SymbolInventory inventory_;
};

/// Normalizes with the built-in inventories.
NormalizedPhrase normalize(const RawPhrase& phrase, NormalizeMode mode);

/// Text and kept punctuation only, interior white space collapsed, ends trimmed.
/// Applied to Strip output this is the classic "preprocessed phrase".
std::string text_only(const NormalizedPhrase& phrase);

/// Reads a corpus file: one phrase per line, optional "id<TAB>" prefix. Lines
/// without an id get "p<line number>". Blank lines are skipped.
std::vector<RawPhrase> load_corpus(const std::filesystem::path& path);
std::vector<RawPhrase> parse_corpus(std::string_view text);

}  // namespace gesturemap
