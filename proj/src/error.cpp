// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "latprune/error.hpp"

namespace latprune {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidNetwork: return "InvalidNetwork";
    case ErrorCode::kDuplicateLayerId: return "DuplicateLayerId";
    case ErrorCode::kNonContiguousBlock: return "NonContiguousBlock";
    case ErrorCode::kCouplingChannelMismatch: return "CouplingChannelMismatch";
    case ErrorCode::kBlockBoundaryUncoupled: return "BlockBoundaryUncoupled";
    case ErrorCode::kNegativeScore: return "NegativeScore";
    case ErrorCode::kNonFiniteScore: return "NonFiniteScore";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kKOutOfRange: return "KOutOfRange";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kPrecedenceViolation: return "PrecedenceViolation";
    case ErrorCode::kInvalidTable: return "InvalidTable";
    case ErrorCode::kInvalidProblem: return "InvalidProblem";
    case ErrorCode::kEnumerationCapExceeded: return "EnumerationCapExceeded";
    case ErrorCode::kStateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorCode::kTimeLimitReached: return "TimeLimitReached";
    case ErrorCode::kNodeLimitReached: return "NodeLimitReached";
    case ErrorCode::kInvalidBudget: return "InvalidBudget";
    case ErrorCode::kEmptyLayerResult: return "EmptyLayerResult";
    case ErrorCode::kInfeasibleSolution: return "InfeasibleSolution";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace latprune
