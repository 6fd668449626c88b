#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "constellation/core/types.hpp"

namespace constellation::aip {

enum class AgentStatus { Idle, Busy, Disconnected };
enum class ProfileSource { UserConfig, ServiceManifest, ClientTelemetry };

std::string_view to_string(AgentStatus s);
std::string_view to_string(ProfileSource s);

struct Performance {
    int cpu_cores = 0;
    double memory_gb = 0.0;
    std::vector<std::string> gpus;
    double disk_gb = 0.0;
    bool operator==(const Performance&) const = default;
};

struct NetworkInfo {
    std::string host;
    std::string ip;
    bool operator==(const NetworkInfo&) const = default;
};

struct AgentProfile {
    std::string agent_id;
    AgentStatus status = AgentStatus::Disconnected;
    std::string os;
    std::string os_version;
    std::vector<std::string> capabilities;
    Performance performance;
    std::map<std::string, std::string> paths;
    std::optional<NetworkInfo> network;
    double last_heartbeat = 0.0;
    // Field group (identity, capabilities, performance, paths, network) to the
    // stage that last wrote it.
    std::map<std::string, ProfileSource> sources;

    bool operator==(const AgentProfile&) const = default;
};

Json to_json(const AgentProfile& p);

// Field groups and the flat keys that belong to them.
const std::map<std::string, std::vector<std::string>>& profile_groups();

// Agent profiles merged from three stages. Each merge overwrites the fields
// its document carries, so user config < manifest < telemetry when applied in
// that order.
class ProfileRegistry {
  public:
    // Throws SchemaViolation on an empty id or a field of the wrong type.
    void merge(const std::string& agent_id, ProfileSource src, const Json& fields);
    // Full three-stage registration. Leaves status IDLE.
    const AgentProfile& register_agent(const std::string& agent_id, const Json& user_config, const Json& manifest,
                                       const Json& telemetry);

    // last_heartbeat never moves backwards.
    void heartbeat(const std::string& agent_id, double t);
    void set_status(const std::string& agent_id, AgentStatus s);

    bool contains(const std::string& agent_id) const { return profiles_.count(agent_id) > 0; }
    const AgentProfile& get(const std::string& agent_id) const;
    const std::map<std::string, AgentProfile>& all() const { return profiles_; }

    // Agents that may receive tasks (status != DISCONNECTED).
    std::vector<std::string> pool() const;

    Json to_json() const;

  private:
    std::map<std::string, AgentProfile> profiles_;
};

// Telemetry of the GPU node on the sample agent card.
Json gpu_node_telemetry();

}  // namespace constellation::aip
