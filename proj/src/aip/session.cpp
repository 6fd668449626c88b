#include "constellation/aip/session.hpp"

namespace constellation::aip {

std::string_view to_string(SessionPhase p) {
    switch (p) {
        case SessionPhase::Registering: return "REGISTERING";
        case SessionPhase::Active:      return "ACTIVE";
        case SessionPhase::EditingTask: return "EDITING_TASK";
        case SessionPhase::Closed:      return "CLOSED";
    }
    return "CLOSED";
}

std::uint64_t SeqTracker::next_out(const std::string& session) {
    return ++out_[session];
}

bool SeqTracker::accept(const std::string& session, const std::string& sender, std::uint64_t seq) {
    auto& last = in_[{session, sender}];
    if (seq <= last) return false;
    last = seq;
    return true;
}

}  // namespace constellation::aip
