#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gesturemap {

enum class ErrorCode {
  InvalidInput,
  ParseError,
  DimensionMismatch,
  LexiconCycle,
  EmptyInput,
  UniverseMismatch,
  MissingLabel,
  UnknownId,
  InvalidSplit,
  InvalidRule,
  UnknownGesture,
  TooFewPairs,
  IncompleteData,
  OutOfRange,
  UnknownFixture,
  MalformedFixture,
  StoreCorrupt,
  IoError,
  PortInUse,
};

/// Stable machine-readable name, used in CLI diagnostics and service error bodies.
std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gesturemap
