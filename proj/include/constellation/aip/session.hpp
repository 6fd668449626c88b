#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "constellation/aip/message.hpp"

namespace constellation::aip {

enum class SessionPhase { Registering, Active, EditingTask, Closed };

std::string_view to_string(SessionPhase p);

struct Session {
    std::string id;
    std::string local;
    std::string peer;
    SessionPhase phase = SessionPhase::Registering;
    std::set<std::string> outstanding_commands;  // COMMAND response_ids awaiting results
    std::set<TaskId> open_tasks;                 // TASKs without a TASK_END yet
};

// Per-sender sequence bookkeeping. Outgoing counters are per session; an
// incoming frame whose seq is not above the last one seen from that sender in
// that session is a duplicate.
class SeqTracker {
  public:
    std::uint64_t next_out(const std::string& session);
    // True when the frame is new. Updates the high-water mark.
    bool accept(const std::string& session, const std::string& sender, std::uint64_t seq);

  private:
    std::map<std::string, std::uint64_t> out_;
    std::map<std::pair<std::string, std::string>, std::uint64_t> in_;
};

}  // namespace constellation::aip
