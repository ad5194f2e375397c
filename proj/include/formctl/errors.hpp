#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace formctl {

enum class ErrorCode {
  InvalidGraph,
  NotWeaklyConnected,
  InvalidIndices,
  SizeMismatch,
  DegenerateBracket,
  EmptyGeneratorSet,
  ArithmeticOverflow,
  EmptySubset,
  IndexOutOfRange,
  RequiresNGreaterThann,
  RankMismatch,
  Degenerate,
  SimplexDegenerate,
  EmptyInput,
  DimensionMismatch,
  InvalidStratum,
  NotInQ,
  StructuralFailure,
  NegativeDuration,
  UnknownEdge,
  InconsistentSchedule,
  StepTooLarge,
  SegmentFailure,
  InvalidArgument,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Parse and file errors map to CLI exit status 2, everything else to 1.
constexpr bool is_io_error(ErrorCode code) noexcept {
  return code == ErrorCode::ParseError || code == ErrorCode::IoError;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace formctl
