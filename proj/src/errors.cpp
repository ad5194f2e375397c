#include "formctl/errors.hpp"

namespace formctl {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::NotWeaklyConnected: return "NotWeaklyConnected";
    case ErrorCode::InvalidIndices: return "InvalidIndices";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::DegenerateBracket: return "DegenerateBracket";
    case ErrorCode::EmptyGeneratorSet: return "EmptyGeneratorSet";
    case ErrorCode::ArithmeticOverflow: return "ArithmeticOverflow";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::RequiresNGreaterThann: return "RequiresNGreaterThann";
    case ErrorCode::RankMismatch: return "RankMismatch";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::SimplexDegenerate: return "SimplexDegenerate";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidStratum: return "InvalidStratum";
    case ErrorCode::NotInQ: return "NotInQ";
    case ErrorCode::StructuralFailure: return "StructuralFailure";
    case ErrorCode::NegativeDuration: return "NegativeDuration";
    case ErrorCode::UnknownEdge: return "UnknownEdge";
    case ErrorCode::InconsistentSchedule: return "InconsistentSchedule";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::SegmentFailure: return "SegmentFailure";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace formctl
