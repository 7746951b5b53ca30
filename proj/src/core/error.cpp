#include "netbench/core/error.hpp"

namespace netbench {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownAction: return "UnknownAction";
    case ErrorCode::kArityMismatch: return "ArityMismatch";
    case ErrorCode::kApplicationRejected: return "ApplicationRejected";
    case ErrorCode::kUnknownApp: return "UnknownApp";
    case ErrorCode::kEmptyLevelSet: return "EmptyLevelSet";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kUnknownNode: return "UnknownNode";
    case ErrorCode::kDuplicateName: return "DuplicateName";
    case ErrorCode::kHierarchyViolation: return "HierarchyViolation";
    case ErrorCode::kInvalidValue: return "InvalidValue";
    case ErrorCode::kNoEligibleOperand: return "NoEligibleOperand";
    case ErrorCode::kParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::kUnknownFamily: return "UnknownFamily";
    case ErrorCode::kMethodOutOfRange: return "MethodOutOfRange";
    case ErrorCode::kIneffectiveInjection: return "IneffectiveInjection";
    case ErrorCode::kNodeSetMismatch: return "NodeSetMismatch";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kMissingInverse: return "MissingInverse";
    case ErrorCode::kAppMismatch: return "AppMismatch";
    case ErrorCode::kZeroSamples: return "ZeroSamples";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kTransportError: return "TransportError";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kAgentProtocolError: return "AgentProtocolError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

CompositionError::CompositionError(ErrorCode code, std::size_t index, const std::string& message)
    : Error(code, "action " + std::to_string(index) + ": " + message), index_(index) {}

}  // namespace netbench
