// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LATPRUNE_ERROR_HPP_
#define LATPRUNE_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace latprune {

enum class ErrorCode {
  // netgraph
  kInvalidNetwork,
  kDuplicateLayerId,
  kNonContiguousBlock,
  kCouplingChannelMismatch,
  kBlockBoundaryUncoupled,
  // importance
  kNegativeScore,
  kNonFiniteScore,
  kLengthMismatch,
  kKOutOfRange,
  // latency
  kDimensionMismatch,
  kIndexOutOfRange,
  kPrecedenceViolation,
  kInvalidTable,
  // solver
  kInvalidProblem,
  kEnumerationCapExceeded,
  kStateSpaceTooLarge,
  kTimeLimitReached,
  kNodeLimitReached,
  // baseline
  kInvalidBudget,
  kEmptyLayerResult,
  // extract
  kInfeasibleSolution,
  // io
  kParseError,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

// Every failure raised by the library carries one of the codes above. The
// message names the offending layer, block or group where there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace latprune

#endif  // LATPRUNE_ERROR_HPP_
