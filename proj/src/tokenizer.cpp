#include "gesturemap/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "gesturemap/error.hpp"
#include "gesturemap/utf8.hpp"

namespace gesturemap {

std::string_view tag_name(TokenTag tag) noexcept {
  switch (tag) {
    case TokenTag::Standard: return "standard";
    case TokenTag::Slang: return "slang";
    case TokenTag::Buzzword: return "buzzword";
  }
  return "standard";
}

TokenTag parse_tag(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower.empty() || lower == "standard") return TokenTag::Standard;
  if (lower == "slang") return TokenTag::Slang;
  if (lower == "buzzword") return TokenTag::Buzzword;
  throw Error(ErrorCode::ParseError, "unknown lexicon tag '" + std::string(name) + "'");
}

void Lexicon::add(std::string surface, std::vector<std::string> canonical, TokenTag tag) {
  if (surface.empty()) throw Error(ErrorCode::InvalidInput, "lexicon surface must not be empty");
  std::erase_if(canonical, [](const std::string& c) { return c.empty(); });
  if (canonical.empty()) canonical.push_back(surface);
  max_length_ = std::max(max_length_, utf8::length(surface));
  entries_[std::move(surface)] = LexiconEntry{std::move(canonical), tag};
}

void Lexicon::add_stop(std::string surface) {
  if (surface.empty()) throw Error(ErrorCode::InvalidInput, "stoplist surface must not be empty");
  max_length_ = std::max(max_length_, utf8::length(surface));
  stoplist_.insert(std::move(surface));
}

void Lexicon::merge(const Lexicon& other) {
  for (const auto& [surface, entry] : other.entries_) entries_[surface] = entry;
  stoplist_.insert(other.stoplist_.begin(), other.stoplist_.end());
  max_length_ = std::max(max_length_, other.max_length_);
}

bool Lexicon::contains(std::string_view surface) const { return entries_.find(surface) != entries_.end(); }

bool Lexicon::is_stop(std::string_view surface) const { return stoplist_.find(surface) != stoplist_.end(); }

const LexiconEntry* Lexicon::find(std::string_view surface) const {
  auto it = entries_.find(surface);
  return it == entries_.end() ? nullptr : &it->second;
}

void Lexicon::resolve_into(std::string_view form, int hops, std::vector<std::string>& out) const {
  const auto* entry = find(form);
  if (entry == nullptr || (entry->canonical.size() == 1 && entry->canonical.front() == form)) {
    out.emplace_back(form);
    return;
  }
  if (hops >= kMaxCanonicalHops) {
    throw Error(ErrorCode::LexiconCycle,
                "canonicalization of '" + std::string(form) + "' exceeds " +
                    std::to_string(kMaxCanonicalHops) + " hops");
  }
  for (const auto& next : entry->canonical) {
    if (next == form) {
      out.push_back(next);
    } else {
      resolve_into(next, hops + 1, out);
    }
  }
}

std::vector<std::string> Lexicon::resolve(std::string_view surface) const {
  std::vector<std::string> out;
  const auto* entry = find(surface);
  if (entry == nullptr) {
    out.emplace_back(surface);
    return out;
  }
  for (const auto& form : entry->canonical) {
    if (form == surface) {
      out.push_back(form);
    } else {
      resolve_into(form, 1, out);
    }
  }
  return out;
}

void Lexicon::validate() const {
  for (const auto& [surface, entry] : entries_) (void)resolve(surface);
}

namespace {

std::string read_file(const std::filesystem::path& path, std::string_view what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + std::string(what) + " " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view strip(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (strip(line).empty() || strip(line).front() == '#') continue;
    fn(line, line_no);
  }
}

}  // namespace

Lexicon parse_lexicon(std::string_view text) {
  Lexicon lex;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const auto cols = split(line, '\t');
    const auto surface = strip(cols[0]);
    if (surface.empty()) {
      throw Error(ErrorCode::ParseError, "lexicon line " + std::to_string(line_no) + ": empty surface");
    }
    std::vector<std::string> canonical;
    if (cols.size() > 1) {
      for (auto form : split(strip(cols[1]), ' ')) {
        if (!form.empty() && form != "-") canonical.emplace_back(form);
      }
    }
    TokenTag tag = TokenTag::Standard;
    try {
      if (cols.size() > 2) tag = parse_tag(strip(cols[2]));
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, "lexicon line " + std::to_string(line_no) + ": " + e.what());
    }
    lex.add(std::string(surface), std::move(canonical), tag);
  });
  lex.validate();
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) { return parse_lexicon(read_file(path, "lexicon")); }

Lexicon parse_stoplist(std::string_view text) {
  Lexicon lex;
  for_each_line(text, [&](std::string_view line, std::size_t) { lex.add_stop(std::string(strip(line))); });
  return lex;
}

Lexicon load_stoplist(const std::filesystem::path& path) { return parse_stoplist(read_file(path, "stoplist")); }

std::vector<Piece> TokenList::residue() const {
  std::vector<Piece> out;
  std::copy_if(pieces.begin(), pieces.end(), std::back_inserter(out),
               [](const Piece& p) { return p.kind == PieceKind::Residue; });
  return out;
}

std::vector<Piece> TokenList::stops() const {
  std::vector<Piece> out;
  std::copy_if(pieces.begin(), pieces.end(), std::back_inserter(out),
               [](const Piece& p) { return p.kind == PieceKind::Stop; });
  return out;
}

TokenList tokenize(std::string_view text, const Lexicon& lexicon) {
  const auto cps = utf8::decode(text);
  const std::size_t n = cps.size();
  auto byte_at = [&](std::size_t i) { return i < n ? cps[i].offset : text.size(); };

  TokenList out;
  std::size_t residue_start = n;  // n means "no open residue span"
  auto flush_residue = [&](std::size_t end) {
    if (residue_start >= end) {
      residue_start = n;
      return;
    }
    const std::size_t b = byte_at(residue_start);
    std::string surface(text.substr(b, byte_at(end) - b));
    out.pieces.push_back(Piece{PieceKind::Residue, b, surface});
    out.tokens.push_back(Token{surface, {surface}, TokenTag::Standard, b, true});
    residue_start = n;
  };

  std::size_t i = 0;
  while (i < n) {
    if (utf8::is_space(cps[i].value)) {
      flush_residue(i);
      std::size_t end = i;
      while (end < n && utf8::is_space(cps[end].value)) ++end;
      const std::size_t b = byte_at(i);
      out.pieces.push_back(Piece{PieceKind::Space, b, std::string(text.substr(b, byte_at(end) - b))});
      i = end;
      continue;
    }

    // Longest match; at equal length the stoplist wins.
    std::size_t best_len = 0;
    bool best_stop = false;
    const std::size_t limit = std::min(lexicon.max_surface_length(), n - i);
    for (std::size_t len = limit; len >= 1; --len) {
      const std::size_t b = byte_at(i);
      const std::string_view candidate = text.substr(b, byte_at(i + len) - b);
      if (lexicon.is_stop(candidate)) {
        best_len = len;
        best_stop = true;
        break;
      }
      if (lexicon.contains(candidate)) {
        best_len = len;
        break;
      }
    }

    if (best_len == 0) {
      if (residue_start == n) residue_start = i;
      ++i;
      continue;
    }

    flush_residue(i);
    const std::size_t b = byte_at(i);
    std::string surface(text.substr(b, byte_at(i + best_len) - b));
    if (best_stop) {
      out.pieces.push_back(Piece{PieceKind::Stop, b, std::move(surface)});
    } else {
      out.pieces.push_back(Piece{PieceKind::Lexical, b, surface});
      Token token{surface, lexicon.resolve(surface), lexicon.find(surface)->tag, b, false};
      out.tokens.push_back(std::move(token));
    }
    i += best_len;
  }
  flush_residue(n);
  return out;
}

std::vector<std::string> canonical_stream(const TokenList& tokens, bool use_canonical) {
  std::vector<std::string> out;
  for (const auto& token : tokens.tokens) {
    if (use_canonical) {
      out.insert(out.end(), token.canonical.begin(), token.canonical.end());
    } else {
      out.push_back(token.surface);
    }
  }
  return out;
}

}  // namespace gesturemap
