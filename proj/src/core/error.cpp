#include "constellation/error.hpp"

#include <sstream>

namespace constellation {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DuplicateId:        return "DuplicateId";
        case ErrorCode::NotFound:           return "NotFound";
        case ErrorCode::ImmutableTask:      return "ImmutableTask";
        case ErrorCode::IllegalField:       return "IllegalField";
        case ErrorCode::CycleIntroduced:    return "CycleIntroduced";
        case ErrorCode::DuplicateEdge:      return "DuplicateEdge";
        case ErrorCode::DanglingEdge:       return "DanglingEdge";
        case ErrorCode::IncoherentStatus:   return "IncoherentStatus";
        case ErrorCode::ValidationFailed:   return "ValidationFailed";
        case ErrorCode::ParseError:         return "ParseError";
        case ErrorCode::UnknownCondition:   return "UnknownCondition";
        case ErrorCode::UnknownTask:        return "UnknownTask";
        case ErrorCode::IllegalTransition:  return "IllegalTransition";
        case ErrorCode::ScriptMiss:         return "ScriptMiss";
        case ErrorCode::InvalidDelta:       return "InvalidDelta";
        case ErrorCode::PlannerError:       return "PlannerError";
        case ErrorCode::DispatchError:      return "DispatchError";
        case ErrorCode::SchemaViolation:    return "SchemaViolation";
        case ErrorCode::PeerDisconnected:   return "PeerDisconnected";
        case ErrorCode::Timeout:            return "Timeout";
        case ErrorCode::AttemptsExhausted:  return "AttemptsExhausted";
        case ErrorCode::NoScriptEntry:      return "NoScriptEntry";
        case ErrorCode::ClientUnavailable:  return "ClientUnavailable";
        case ErrorCode::StepLimitExceeded:  return "StepLimitExceeded";
        case ErrorCode::IncompleteRun:      return "IncompleteRun";
        case ErrorCode::VerdictMismatch:    return "VerdictMismatch";
        case ErrorCode::BoundExceeded:      return "BoundExceeded";
        case ErrorCode::InvariantViolation: return "InvariantViolation";
    }
    return "Unknown";
}

std::string describe(const std::vector<Violation>& violations) {
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        const auto& v = violations[i];
        if (i > 0) os << "; ";
        os << to_string(v.kind);
        if (!v.subjects.empty()) {
            os << " {";
            for (std::size_t j = 0; j < v.subjects.size(); ++j) {
                if (j > 0) os << ",";
                os << v.subjects[j];
            }
            os << "}";
        }
        if (!v.message.empty()) os << ": " << v.message;
    }
    return os.str();
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

Error::Error(ErrorCode code, const std::string& message, std::vector<Violation> violations)
    : std::runtime_error(std::string(to_string(code)) + ": " + message +
                         (violations.empty() ? "" : " [" + describe(violations) + "]")),
      code_(code),
      violations_(std::move(violations)) {}

}  // namespace constellation
