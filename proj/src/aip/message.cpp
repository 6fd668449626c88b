#include "constellation/aip/message.hpp"

#include "constellation/error.hpp"

namespace constellation::aip {

std::string_view to_string(MsgType t) {
    switch (t) {
        case MsgType::Register:           return "REGISTER";
        case MsgType::Task:               return "TASK";
        case MsgType::Command:            return "COMMAND";
        case MsgType::CommandResults:     return "COMMAND_RESULTS";
        case MsgType::TaskEnd:            return "TASK_END";
        case MsgType::Heartbeat:          return "HEARTBEAT";
        case MsgType::DeviceInfoRequest:  return "DEVICE_INFO_REQUEST";
        case MsgType::DeviceInfoResponse: return "DEVICE_INFO_RESPONSE";
        case MsgType::Error:              return "ERROR";
    }
    return "ERROR";
}

std::string_view to_string(Direction d) {
    switch (d) {
        case Direction::ClientToServer: return "CLIENT_TO_SERVER";
        case Direction::ServerToClient: return "SERVER_TO_CLIENT";
        case Direction::Bidirectional:  return "BIDIRECTIONAL";
    }
    return "BIDIRECTIONAL";
}

std::optional<MsgType> parse_msg_type(std::string_view s) {
    for (auto t : kAllTypes)
        if (to_string(t) == s) return t;
    return std::nullopt;
}

std::optional<Direction> parse_direction(std::string_view s) {
    for (auto d : {Direction::ClientToServer, Direction::ServerToClient, Direction::Bidirectional})
        if (to_string(d) == s) return d;
    return std::nullopt;
}

Direction direction_of(MsgType t) {
    switch (t) {
        case MsgType::Register:
        case MsgType::Task:
        case MsgType::CommandResults:
        case MsgType::DeviceInfoRequest:  return Direction::ClientToServer;
        case MsgType::Command:
        case MsgType::TaskEnd:
        case MsgType::DeviceInfoResponse: return Direction::ServerToClient;
        case MsgType::Heartbeat:
        case MsgType::Error:              return Direction::Bidirectional;
    }
    return Direction::Bidirectional;
}

bool is_idempotent(MsgType t) {
    return t != MsgType::Command && t != MsgType::Task && t != MsgType::Error;
}

MsgType type_of(const Body& b) {
    return static_cast<MsgType>(b.index());
}

AipMessage make_message(Body b, std::string sender, std::optional<std::string> session, std::uint64_t seq) {
    AipMessage m;
    m.msg_type = type_of(b);
    m.direction = direction_of(m.msg_type);
    m.session_id = std::move(session);
    m.seq = seq;
    m.sender = std::move(sender);
    m.body = std::move(b);
    return m;
}

namespace {

[[noreturn]] void violation(const std::string& field, const std::string& reason) {
    throw constellation::Error(ErrorCode::SchemaViolation, field + ": " + reason,
                               {Violation{ErrorCode::SchemaViolation, reason, {field}}});
}

const Json& need(const Json& j, const std::string& key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) violation(path + key, "required field is missing");
    return *it;
}

std::string need_str(const Json& j, const std::string& key, const std::string& path, bool allow_empty = true) {
    const auto& v = need(j, key, path);
    if (!v.is_string()) violation(path + key, "must be a string");
    auto s = v.get<std::string>();
    if (!allow_empty && s.empty()) violation(path + key, "must not be empty");
    return s;
}

std::optional<std::string> opt_str(const Json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_string()) violation(path + key, "must be a string");
    return j[key].get<std::string>();
}

const Json& need_obj(const Json& j, const std::string& key, const std::string& path) {
    const auto& v = need(j, key, path);
    if (!v.is_object()) violation(path + key, "must be an object");
    return v;
}

const Json& need_arr(const Json& j, const std::string& key, const std::string& path) {
    const auto& v = need(j, key, path);
    if (!v.is_array()) violation(path + key, "must be an array");
    return v;
}

Json body_json(const Body& b) {
    return std::visit(
        [](const auto& x) -> Json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, body::Register>) {
                return {{"client_id", x.client_id}, {"metadata", x.metadata}};
            } else if constexpr (std::is_same_v<T, body::Task>) {
                return {{"request_id", x.request_id}, {"task_id", x.task_id}, {"request", x.request}, {"task", x.task}};
            } else if constexpr (std::is_same_v<T, body::Command>) {
                Json acts = Json::array();
                for (const auto& a : x.actions)
                    acts.push_back({{"id", a.id}, {"function", a.function}, {"arguments", a.arguments}});
                return {{"response_id", x.response_id}, {"task_id", x.task_id}, {"actions", acts}};
            } else if constexpr (std::is_same_v<T, body::CommandResults>) {
                Json rs = Json::array();
                for (const auto& r : x.action_results) {
                    Json rj{{"id", r.id}, {"status", r.status}, {"value", r.value}};
                    if (r.error) rj["error"] = *r.error;
                    rs.push_back(rj);
                }
                return {{"prev_response_id", x.prev_response_id}, {"action_results", rs}};
            } else if constexpr (std::is_same_v<T, body::TaskEnd>) {
                Json j{{"request_id", x.request_id}, {"task_id", x.task_id}, {"status", x.status}};
                if (x.result) j["result"] = *x.result;
                if (x.error) j["error"] = *x.error;
                if (x.failure_reason) j["failure_reason"] = *x.failure_reason;
                return j;
            } else if constexpr (std::is_same_v<T, body::Heartbeat>) {
                Json j{{"timestamp", x.timestamp}};
                if (x.status) j["status"] = *x.status;
                return j;
            } else if constexpr (std::is_same_v<T, body::DeviceInfoRequest>) {
                return {{"target_id", x.target_id}, {"request_id", x.request_id}};
            } else if constexpr (std::is_same_v<T, body::DeviceInfoResponse>) {
                return {{"response_id", x.response_id}, {"result", x.result}};
            } else {
                return {{"error", x.error}, {"context", x.context}};
            }
        },
        b);
}

Body body_from_json(MsgType t, const Json& j) {
    const std::string p = "body.";
    if (!j.is_object()) violation("body", "must be an object");
    switch (t) {
        case MsgType::Register: {
            body::Register b;
            b.client_id = need_str(j, "client_id", p, false);
            b.metadata = need_obj(j, "metadata", p);
            return b;
        }
        case MsgType::Task: {
            body::Task b;
            b.request_id = need_str(j, "request_id", p, false);
            b.task_id = need_str(j, "task_id", p, false);
            b.request = need_str(j, "request", p);
            b.task = need_obj(j, "task", p);
            return b;
        }
        case MsgType::Command: {
            body::Command b;
            b.response_id = need_str(j, "response_id", p, false);
            b.task_id = need_str(j, "task_id", p);
            const auto& acts = need_arr(j, "actions", p);
            for (std::size_t i = 0; i < acts.size(); ++i) {
                auto ap = p + "actions[" + std::to_string(i) + "].";
                if (!acts[i].is_object()) violation(ap, "must be an object");
                Action a;
                a.id = need_str(acts[i], "id", ap, false);
                a.function = need_str(acts[i], "function", ap, false);
                a.arguments = need_obj(acts[i], "arguments", ap);
                b.actions.push_back(std::move(a));
            }
            return b;
        }
        case MsgType::CommandResults: {
            body::CommandResults b;
            b.prev_response_id = need_str(j, "prev_response_id", p, false);
            const auto& rs = need_arr(j, "action_results", p);
            for (std::size_t i = 0; i < rs.size(); ++i) {
                auto rp = p + "action_results[" + std::to_string(i) + "].";
                if (!rs[i].is_object()) violation(rp, "must be an object");
                ActionResult r;
                r.id = need_str(rs[i], "id", rp, false);
                r.status = need_str(rs[i], "status", rp);
                if (r.status != "OK" && r.status != "ERROR") violation(rp + "status", "must be OK or ERROR");
                r.value = need(rs[i], "value", rp);
                r.error = opt_str(rs[i], "error", rp);
                b.action_results.push_back(std::move(r));
            }
            return b;
        }
        case MsgType::TaskEnd: {
            body::TaskEnd b;
            b.request_id = need_str(j, "request_id", p, false);
            b.task_id = need_str(j, "task_id", p, false);
            b.status = need_str(j, "status", p);
            if (b.status != "COMPLETED" && b.status != "FAILED") violation(p + "status", "must be COMPLETED or FAILED");
            if (j.contains("result")) b.result = j["result"];
            b.error = opt_str(j, "error", p);
            b.failure_reason = opt_str(j, "failure_reason", p);
            if (b.status == "FAILED" && !b.error) violation(p + "error", "required when status is FAILED");
            if (b.failure_reason && !parse_failure_reason(*b.failure_reason))
                violation(p + "failure_reason", "unknown reason");
            return b;
        }
        case MsgType::Heartbeat: {
            body::Heartbeat b;
            const auto& ts = need(j, "timestamp", p);
            if (!ts.is_number()) violation(p + "timestamp", "must be a number");
            b.timestamp = ts.get<double>();
            b.status = opt_str(j, "status", p);
            return b;
        }
        case MsgType::DeviceInfoRequest: {
            body::DeviceInfoRequest b;
            b.target_id = need_str(j, "target_id", p, false);
            b.request_id = need_str(j, "request_id", p, false);
            return b;
        }
        case MsgType::DeviceInfoResponse: {
            body::DeviceInfoResponse b;
            b.response_id = need_str(j, "response_id", p, false);
            b.result = need(j, "result", p);
            return b;
        }
        case MsgType::Error: {
            body::Error b;
            b.error = need_str(j, "error", p, false);
            b.context = need_obj(j, "context", p);
            return b;
        }
    }
    violation("msg_type", "unhandled");
}

}  // namespace

Json to_json(const AipMessage& m) {
    Json j{{"msg_type", to_string(m.msg_type)},
           {"direction", to_string(m.direction)},
           {"seq", m.seq},
           {"sender", m.sender},
           {"body", body_json(m.body)}};
    if (m.session_id) j["session_id"] = *m.session_id;
    return j;
}

AipMessage message_from_json(const Json& j) {
    if (!j.is_object()) violation("message", "must be an object");
    AipMessage m;
    auto ts = need_str(j, "msg_type", "");
    auto t = parse_msg_type(ts);
    if (!t) violation("msg_type", "unknown type '" + ts + "'");
    m.msg_type = *t;
    auto ds = need_str(j, "direction", "");
    auto d = parse_direction(ds);
    if (!d) violation("direction", "unknown direction '" + ds + "'");
    if (*d != direction_of(*t)) violation("direction", ds + " is not allowed for " + ts);
    m.direction = *d;
    m.session_id = opt_str(j, "session_id", "");
    if (m.msg_type == MsgType::Task && !m.session_id) violation("session_id", "required for TASK");
    const auto& seq = need(j, "seq", "");
    if (!seq.is_number_unsigned() && !(seq.is_number_integer() && seq.get<long long>() >= 0))
        violation("seq", "must be a non-negative integer");
    m.seq = seq.get<std::uint64_t>();
    m.sender = need_str(j, "sender", "", false);
    m.body = body_from_json(m.msg_type, need(j, "body", ""));
    return m;
}

Bytes encode(const AipMessage& m) {
    auto payload = to_json(m).dump();
    auto n = static_cast<std::uint32_t>(payload.size());
    Bytes out;
    out.reserve(4 + payload.size());
    out.push_back(static_cast<char>((n >> 24) & 0xff));
    out.push_back(static_cast<char>((n >> 16) & 0xff));
    out.push_back(static_cast<char>((n >> 8) & 0xff));
    out.push_back(static_cast<char>(n & 0xff));
    out += payload;
    return out;
}

AipMessage decode(const Bytes& frame) {
    if (frame.size() < 4) violation("frame", "shorter than the length prefix");
    auto b = [&](int i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(frame[i])); };
    std::uint32_t n = b(0) << 24 | b(1) << 16 | b(2) << 8 | b(3);
    if (frame.size() - 4 != n) violation("frame", "length prefix does not match payload size");
    Json j;
    try {
        j = Json::parse(frame.begin() + 4, frame.end());
    } catch (const Json::parse_error& e) {
        violation("frame", std::string("invalid JSON: ") + e.what());
    }
    return message_from_json(j);
}

std::string peek_type(const Bytes& frame) {
    if (frame.size() < 4) return "";
    auto j = Json::parse(frame.begin() + 4, frame.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("msg_type") || !j["msg_type"].is_string()) return "";
    return j["msg_type"].get<std::string>();
}

}  // namespace constellation::aip
