#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace constellation {

enum class ErrorCode {
    DuplicateId,
    NotFound,
    ImmutableTask,
    IllegalField,
    CycleIntroduced,
    DuplicateEdge,
    DanglingEdge,
    IncoherentStatus,
    ValidationFailed,
    ParseError,
    UnknownCondition,
    UnknownTask,
    IllegalTransition,
    ScriptMiss,
    InvalidDelta,
    PlannerError,
    DispatchError,
    SchemaViolation,
    PeerDisconnected,
    Timeout,
    AttemptsExhausted,
    NoScriptEntry,
    ClientUnavailable,
    StepLimitExceeded,
    IncompleteRun,
    VerdictMismatch,
    BoundExceeded,
    InvariantViolation,
};

std::string_view to_string(ErrorCode code);

// One finding reported by a validator. `subjects` names the task/edge ids
// involved, sorted.
struct Violation {
    ErrorCode kind;
    std::string message;
    std::vector<std::string> subjects;

    bool operator==(const Violation&) const = default;
};

std::string describe(const std::vector<Violation>& violations);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message);
    Error(ErrorCode code, const std::string& message, std::vector<Violation> violations);

    ErrorCode code() const noexcept {
        return code_;
    }

    const std::vector<Violation>& violations() const noexcept {
        return violations_;
    }

  private:
    ErrorCode code_;
    std::vector<Violation> violations_;
};

}  // namespace constellation
