#include "gesturemap/utf8.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "gesturemap/error.hpp"

namespace gesturemap {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LexiconCycle: return "LexiconCycle";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::UniverseMismatch: return "UniverseMismatch";
    case ErrorCode::MissingLabel: return "MissingLabel";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::InvalidSplit: return "InvalidSplit";
    case ErrorCode::InvalidRule: return "InvalidRule";
    case ErrorCode::UnknownGesture: return "UnknownGesture";
    case ErrorCode::TooFewPairs: return "TooFewPairs";
    case ErrorCode::IncompleteData: return "IncompleteData";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::UnknownFixture: return "UnknownFixture";
    case ErrorCode::MalformedFixture: return "MalformedFixture";
    case ErrorCode::StoreCorrupt: return "StoreCorrupt";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::PortInUse: return "PortInUse";
  }
  return "Unknown";
}

namespace utf8 {

namespace {

template <typename Fn>
bool walk(std::string_view text, Fn&& fn) {
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto n = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < n) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(s, i, n, c);
    if (c < 0) return false;
    fn(CodePoint{static_cast<char32_t>(c), static_cast<std::size_t>(start),
                 static_cast<std::size_t>(i - start)});
  }
  return true;
}

}  // namespace

bool is_valid(std::string_view text) noexcept {
  return walk(text, [](const CodePoint&) {});
}

std::vector<CodePoint> decode(std::string_view text) {
  std::vector<CodePoint> out;
  out.reserve(text.size());
  if (!walk(text, [&](const CodePoint& cp) { out.push_back(cp); })) {
    throw Error(ErrorCode::InvalidInput, "input is not valid UTF-8");
  }
  return out;
}

void append(std::string& out, char32_t cp) {
  uint8_t buf[4];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(buf, len, 4, static_cast<UChar32>(cp), error);
  if (error) throw Error(ErrorCode::InvalidInput, "code point cannot be encoded as UTF-8");
  out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(len));
}

std::string encode(char32_t cp) {
  std::string out;
  append(out, cp);
  return out;
}

std::size_t length(std::string_view text) {
  std::size_t count = 0;
  if (!walk(text, [&](const CodePoint&) { ++count; })) {
    throw Error(ErrorCode::InvalidInput, "input is not valid UTF-8");
  }
  return count;
}

bool is_space(char32_t cp) noexcept {
  return u_isUWhiteSpace(static_cast<UChar32>(cp));
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (const auto& cp : decode(text)) {
    if (is_space(cp.value)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.append(text.substr(cp.offset, cp.length));
  }
  return out;
}

}  // namespace utf8
}  // namespace gesturemap
