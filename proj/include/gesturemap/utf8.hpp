#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace gesturemap::utf8 {

struct CodePoint {
  char32_t value;
  std::size_t offset;  // byte offset in the source string
  std::size_t length;  // encoded length in bytes
};

bool is_valid(std::string_view text) noexcept;

/// Decodes `text`; throws Error(InvalidInput) on malformed UTF-8.
std::vector<CodePoint> decode(std::string_view text);

void append(std::string& out, char32_t cp);
std::string encode(char32_t cp);

std::size_t length(std::string_view text);

/// Trims Unicode white space at both ends and collapses interior runs to one ASCII space.
std::string collapse_whitespace(std::string_view text);

bool is_space(char32_t cp) noexcept;

}  // namespace gesturemap::utf8
