#include "constellation/aip/checks.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "constellation/aip/message.hpp"
#include "constellation/error.hpp"

namespace constellation::aip {

namespace {

struct Delivered {
    double at;
    std::uint64_t wire_id;
    AipMessage m;
    bool duplicate;
};

struct SessionLog {
    bool lossy = false;
    std::vector<Delivered> frames;
};

}  // namespace

WireCheck check_wire(const std::vector<sim::WireRecord>& log, double end) {
    WireCheck out;
    std::map<std::string, SessionLog> sessions;
    for (const auto& r : log) {
        ++out.frames;
        AipMessage m;
        try {
            m = decode(r.bytes);
        } catch (const Error&) {
            continue;  // malformed frames are answered with ERROR, not tracked
        }
        if (!m.session_id) continue;
        auto& s = sessions[*m.session_id];
        if (!r.delivered || *r.delivered > end) {
            s.lossy = true;
            continue;
        }
        if (r.duplicate) ++out.duplicates;
        if (r.duplicate && m.msg_type == MsgType::Command) ++out.command_duplicates;
        s.frames.push_back({*r.delivered, r.id, std::move(m), r.duplicate});
    }
    out.sessions = sessions.size();

    for (auto& [sid, s] : sessions) {
        std::stable_sort(s.frames.begin(), s.frames.end(), [](const Delivered& a, const Delivered& b) {
            return a.at != b.at ? a.at < b.at : a.wire_id < b.wire_id;
        });
        std::map<std::string, std::uint64_t> last;
        for (const auto& f : s.frames) {
            if (f.duplicate) continue;
            auto& l = last[f.m.sender];
            if (f.m.seq <= l)
                out.fifo_violations.push_back(sid + ": " + f.m.sender + " seq " + std::to_string(f.m.seq) +
                                              " delivered after seq " + std::to_string(l));
            l = std::max(l, f.m.seq);
        }
        if (s.lossy) continue;
        ++out.complete_sessions;

        std::map<std::string, int> commands, results;
        std::map<std::string, int> tasks, ends;
        for (const auto& f : s.frames) {
            if (f.duplicate) continue;
            std::visit(
                [&](const auto& b) {
                    using T = std::decay_t<decltype(b)>;
                    if constexpr (std::is_same_v<T, body::Command>) ++commands[b.response_id];
                    else if constexpr (std::is_same_v<T, body::CommandResults>) ++results[b.prev_response_id];
                    else if constexpr (std::is_same_v<T, body::Task>) ++tasks[b.request_id];
                    else if constexpr (std::is_same_v<T, body::TaskEnd>) ++ends[b.request_id];
                },
                f.m.body);
        }
        auto match = [&](const std::map<std::string, int>& req, const std::map<std::string, int>& rsp,
                         const std::string& rq, const std::string& rs) {
            for (const auto& [id, n] : req) {
                auto got = rsp.count(id) ? rsp.at(id) : 0;
                if (n != 1 || got != 1)
                    out.correlation_violations.push_back(sid + ": " + rq + " " + id + " sent " + std::to_string(n) +
                                                         "x, " + rs + " " + std::to_string(got) + "x");
            }
            for (const auto& [id, n] : rsp)
                if (!req.count(id))
                    out.correlation_violations.push_back(sid + ": " + rs + " " + id + " has no " + rq);
        };
        match(commands, results, "COMMAND", "COMMAND_RESULTS");
        match(tasks, ends, "TASK", "TASK_END");
    }
    return out;
}

Json to_json(const WireCheck& c) {
    return Json{{"frames", c.frames},
                {"sessions", c.sessions},
                {"complete_sessions", c.complete_sessions},
                {"duplicates", c.duplicates},
                {"command_duplicates", c.command_duplicates},
                {"fifo_violations", c.fifo_violations},
                {"correlation_violations", c.correlation_violations},
                {"ok", c.ok()}};
}

}  // namespace constellation::aip
