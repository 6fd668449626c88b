#pragma once

#include <string>
#include <vector>

#include "constellation/sim/network.hpp"

namespace constellation::aip {

struct WireCheck {
    std::size_t frames = 0;
    std::size_t sessions = 0;
    std::size_t complete_sessions = 0;  // no frame lost or still in flight
    std::size_t duplicates = 0;
    std::size_t command_duplicates = 0;  // must stay 0
    std::vector<std::string> fifo_violations;
    std::vector<std::string> correlation_violations;

    bool ok() const { return fifo_violations.empty() && correlation_violations.empty() && command_duplicates == 0; }
};

Json to_json(const WireCheck& c);

// FIFO per (session, sender) on every session; correlation totality
// (COMMAND <-> COMMAND_RESULTS, TASK <-> TASK_END, one-to-one) on sessions
// that lost nothing. Frames delivered after `end` count as in flight.
WireCheck check_wire(const std::vector<sim::WireRecord>& log, double end);

}  // namespace constellation::aip
