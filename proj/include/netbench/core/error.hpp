#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace netbench {

enum class ErrorCode {
  kUnknownAction,
  kArityMismatch,
  kApplicationRejected,
  kUnknownApp,
  kEmptyLevelSet,
  kInvalidConfig,
  kParseError,
  kInvariantViolation,
  kUnknownNode,
  kDuplicateName,
  kHierarchyViolation,
  kInvalidValue,
  kNoEligibleOperand,
  kParameterOutOfRange,
  kUnknownFamily,
  kMethodOutOfRange,
  kIneffectiveInjection,
  kNodeSetMismatch,
  kUnknownLabel,
  kMissingInverse,
  kAppMismatch,
  kZeroSamples,
  kIoError,
  kTransportError,
  kTimeout,
  kAgentProtocolError,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure the library reports. The code is stable
/// and is what tests and the CLI branch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by compose_actions; `index` is the position of the failing action.
class CompositionError : public Error {
 public:
  CompositionError(ErrorCode code, std::size_t index, const std::string& message);

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace netbench
