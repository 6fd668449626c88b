#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "constellation/core/types.hpp"

namespace constellation::aip {

using Bytes = std::string;

enum class MsgType {
    Register,
    Task,
    Command,
    CommandResults,
    TaskEnd,
    Heartbeat,
    DeviceInfoRequest,
    DeviceInfoResponse,
    Error,
};

enum class Direction { ClientToServer, ServerToClient, Bidirectional };

inline constexpr MsgType kAllTypes[] = {MsgType::Register,          MsgType::Task,
                                        MsgType::Command,           MsgType::CommandResults,
                                        MsgType::TaskEnd,           MsgType::Heartbeat,
                                        MsgType::DeviceInfoRequest, MsgType::DeviceInfoResponse,
                                        MsgType::Error};

std::string_view to_string(MsgType t);
std::string_view to_string(Direction d);
std::optional<MsgType> parse_msg_type(std::string_view s);
std::optional<Direction> parse_direction(std::string_view s);

Direction direction_of(MsgType t);
// Duplicate delivery converges: REGISTER, COMMAND_RESULTS, TASK_END, HEARTBEAT,
// DEVICE_INFO_*. COMMAND never; TASK is deduplicated by (session, task id).
bool is_idempotent(MsgType t);

struct Action {
    std::string id;
    std::string function;  // EXEC_CLI, SYS_INFO, NOTEPAD_WRITE, ...
    Json arguments = Json::object();
    bool operator==(const Action&) const = default;
};

struct ActionResult {
    std::string id;
    std::string status;  // OK | ERROR
    Json value;
    std::optional<std::string> error;
    bool operator==(const ActionResult&) const = default;
};

namespace body {
struct Register {
    std::string client_id;
    Json metadata = Json::object();
    bool operator==(const Register&) const = default;
};
struct Task {
    std::string request_id;
    TaskId task_id;
    std::string request;  // natural-language task description
    Json task = Json::object();  // the full task spec
    bool operator==(const Task&) const = default;
};
struct Command {
    std::string response_id;
    TaskId task_id;
    std::vector<Action> actions;
    bool operator==(const Command&) const = default;
};
struct CommandResults {
    std::string prev_response_id;
    std::vector<ActionResult> action_results;
    bool operator==(const CommandResults&) const = default;
};
struct TaskEnd {
    std::string request_id;
    TaskId task_id;
    std::string status;  // COMPLETED | FAILED
    std::optional<Json> result;
    std::optional<std::string> error;
    std::optional<std::string> failure_reason;
    bool operator==(const TaskEnd&) const = default;
};
struct Heartbeat {
    double timestamp = 0.0;
    std::optional<std::string> status;  // "OK" when acknowledging
    bool operator==(const Heartbeat&) const = default;
};
struct DeviceInfoRequest {
    std::string target_id;
    std::string request_id;
    bool operator==(const DeviceInfoRequest&) const = default;
};
struct DeviceInfoResponse {
    std::string response_id;
    Json result = Json::object();
    bool operator==(const DeviceInfoResponse&) const = default;
};
struct Error {
    std::string error;
    Json context = Json::object();
    bool operator==(const Error&) const = default;
};
}  // namespace body

using Body = std::variant<body::Register, body::Task, body::Command, body::CommandResults, body::TaskEnd,
                          body::Heartbeat, body::DeviceInfoRequest, body::DeviceInfoResponse, body::Error>;

MsgType type_of(const Body& b);

struct AipMessage {
    MsgType msg_type = MsgType::Heartbeat;
    Direction direction = Direction::Bidirectional;
    std::optional<std::string> session_id;
    std::uint64_t seq = 0;
    std::string sender;
    Body body = body::Heartbeat{};

    bool operator==(const AipMessage&) const = default;
};

// Builds a message with the type and direction implied by the body.
AipMessage make_message(Body b, std::string sender, std::optional<std::string> session, std::uint64_t seq);

Json to_json(const AipMessage& m);
// Validates against the per-type schema. Throws SchemaViolation naming the field.
AipMessage message_from_json(const Json& j);

// Frame: 4-byte big-endian payload length, then UTF-8 JSON.
Bytes encode(const AipMessage& m);
AipMessage decode(const Bytes& frame);

// Best-effort type label of a frame, "" if unreadable. Used for wire logs.
std::string peek_type(const Bytes& frame);

}  // namespace constellation::aip
