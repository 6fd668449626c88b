#pragma once

#include <vector>

#include "constellation/aip/message.hpp"
#include "constellation/util/rng.hpp"

namespace testutil {

inline std::string rand_str(constellation::Rng& r, bool allow_empty = false) {
    static const std::vector<std::string> pieces{"a", "b", "c", "X", "Z", "0", "9", " ", "_", "-", ".",
                                                 "/", ":", "#", "\"", "\\", "\n", "\xc3\xa9"};
    std::string s;
    for (auto n = r.range(allow_empty ? 0 : 1, 12); n > 0; --n)
        s += pieces[static_cast<std::size_t>(r.range(0, static_cast<std::int64_t>(pieces.size()) - 1))];
    return s;
}

inline constellation::Json rand_json(constellation::Rng& r, int depth = 0) {
    using constellation::Json;
    switch (r.range(0, depth > 1 ? 3 : 5)) {
        case 0: return r.range(-1000, 1000);
        case 1: return rand_str(r, true);
        case 2: return r.chance(0.5);
        case 3: return r.uniform(-1e6, 1e6);
        case 4: {
            Json a = Json::array();
            for (int i = 0, n = r.range(0, 3); i < n; ++i) a.push_back(rand_json(r, depth + 1));
            return a;
        }
        default: {
            Json o = Json::object();
            for (int i = 0, n = r.range(0, 3); i < n; ++i) o[rand_str(r)] = rand_json(r, depth + 1);
            return o;
        }
    }
}

inline constellation::Json rand_object(constellation::Rng& r) {
    constellation::Json o = constellation::Json::object();
    for (int i = 0, n = r.range(0, 3); i < n; ++i) o[rand_str(r)] = rand_json(r, 1);
    return o;
}

inline std::vector<constellation::aip::Action> rand_actions(constellation::Rng& r) {
    std::vector<constellation::aip::Action> out;
    for (int i = 0, n = r.range(0, 4); i < n; ++i)
        out.push_back({"a" + std::to_string(i + 1), r.chance(0.5) ? "EXEC_CLI" : "SYS_INFO", rand_object(r)});
    return out;
}

inline constellation::aip::Body rand_body(constellation::Rng& r, constellation::aip::MsgType t) {
    using namespace constellation::aip;
    switch (t) {
        case MsgType::Register: return body::Register{rand_str(r), rand_object(r)};
        case MsgType::Task: return body::Task{rand_str(r), rand_str(r), rand_str(r, true), rand_object(r)};
        case MsgType::Command: return body::Command{rand_str(r), rand_str(r), rand_actions(r)};
        case MsgType::CommandResults: {
            body::CommandResults b{rand_str(r), {}};
            for (int i = 0, n = r.range(0, 4); i < n; ++i) {
                ActionResult a{"a" + std::to_string(i + 1), r.chance(0.7) ? "OK" : "ERROR", rand_json(r), {}};
                if (a.status == "ERROR") a.error = rand_str(r);
                b.action_results.push_back(a);
            }
            return b;
        }
        case MsgType::TaskEnd: {
            body::TaskEnd b{rand_str(r), rand_str(r), r.chance(0.5) ? "COMPLETED" : "FAILED", {}, {}, {}};
            if (r.chance(0.7)) b.result = rand_object(r);
            if (b.status == "FAILED") {
                b.error = rand_str(r);
                if (r.chance(0.5)) b.failure_reason = r.chance(0.5) ? "AGENT_DISCONNECTED" : "TIMEOUT";
            }
            return b;
        }
        case MsgType::Heartbeat: {
            body::Heartbeat b{r.uniform(0, 1e5), {}};
            if (r.chance(0.5)) b.status = "OK";
            return b;
        }
        case MsgType::DeviceInfoRequest: return body::DeviceInfoRequest{rand_str(r), rand_str(r)};
        case MsgType::DeviceInfoResponse: return body::DeviceInfoResponse{rand_str(r), rand_object(r)};
        case MsgType::Error: return body::Error{rand_str(r), rand_object(r)};
    }
    return body::Heartbeat{};
}

// A schema-valid message of type t.
inline constellation::aip::AipMessage rand_message(constellation::Rng& r, constellation::aip::MsgType t) {
    using namespace constellation::aip;
    std::optional<std::string> session;
    if (t == MsgType::Task || r.chance(0.8)) session = rand_str(r);
    return make_message(rand_body(r, t), rand_str(r), session, static_cast<std::uint64_t>(r.range(0, 1 << 30)));
}

}  // namespace testutil
