#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace gesturemap {

enum class TokenTag { Standard, Slang, Buzzword };

std::string_view tag_name(TokenTag tag) noexcept;
TokenTag parse_tag(std::string_view name);

struct LexiconEntry {
  std::vector<std::string> canonical;  // one or more forms; may name other entries
  TokenTag tag = TokenTag::Standard;
};

/// Surface dictionary plus particle/auxiliary stoplist. Immutable once built
/// and shared read-only between tokenizer calls.
class Lexicon {
 public:
  static constexpr int kMaxCanonicalHops = 3;

  /// Adds or replaces an entry; an empty canonical list maps the surface to itself.
  void add(std::string surface, std::vector<std::string> canonical, TokenTag tag = TokenTag::Standard);
  void add_stop(std::string surface);

  /// Entries and stop surfaces from `other` override ours.
  void merge(const Lexicon& other);

  bool contains(std::string_view surface) const;
  bool is_stop(std::string_view surface) const;
  const LexiconEntry* find(std::string_view surface) const;

  /// Follows canonical links until every form is terminal (unknown to the
  /// lexicon or mapped to itself). Throws Error(LexiconCycle) past kMaxCanonicalHops.
  std::vector<std::string> resolve(std::string_view surface) const;

  /// Resolves every entry; throws on the first cycle.
  void validate() const;

  std::size_t max_surface_length() const noexcept { return max_length_; }
  const std::map<std::string, LexiconEntry, std::less<>>& entries() const noexcept { return entries_; }
  const std::set<std::string, std::less<>>& stoplist() const noexcept { return stoplist_; }

 private:
  void resolve_into(std::string_view form, int hops, std::vector<std::string>& out) const;

  std::map<std::string, LexiconEntry, std::less<>> entries_;
  std::set<std::string, std::less<>> stoplist_;
  std::size_t max_length_ = 0;  // in code points
};

/// TSV rows "surface<TAB>canonical forms (space separated)<TAB>tag". Empty or
/// "-" canonical means the surface itself; tag defaults to standard.
Lexicon load_lexicon(const std::filesystem::path& path);
Lexicon parse_lexicon(std::string_view text);

/// One surface per line; "#" comments.
Lexicon load_stoplist(const std::filesystem::path& path);
Lexicon parse_stoplist(std::string_view text);

struct Token {
  std::string surface;
  std::vector<std::string> canonical;
  TokenTag tag = TokenTag::Standard;
  std::size_t position = 0;  // byte offset
  bool residue = false;      // no lexicon entry covered this span
};

enum class PieceKind { Lexical, Stop, Residue, Space };

struct Piece {
  PieceKind kind;
  std::size_t position;
  std::string text;
};

struct TokenList {
  std::vector<Token> tokens;
  std::vector<Piece> pieces;  // every span of the input in order: tiles it exactly

  std::vector<Piece> residue() const;
  std::vector<Piece> stops() const;
};

/// Greedy left-to-right longest match over entries and stoplist. Stop matches
/// are recorded but yield no token; uncovered spans become residue tokens with
/// canonical = surface.
TokenList tokenize(std::string_view text, const Lexicon& lexicon);

/// Surfaces (use_canonical = false) or flattened canonical forms.
std::vector<std::string> canonical_stream(const TokenList& tokens, bool use_canonical);

}  // namespace gesturemap
