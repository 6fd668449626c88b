#include "constellation/aip/profile.hpp"

#include "constellation/core/event.hpp"
#include "constellation/error.hpp"

namespace constellation::aip {

std::string_view to_string(AgentStatus s) {
    switch (s) {
        case AgentStatus::Idle:         return "IDLE";
        case AgentStatus::Busy:         return "BUSY";
        case AgentStatus::Disconnected: return "DISCONNECTED";
    }
    return "DISCONNECTED";
}

std::string_view to_string(ProfileSource s) {
    switch (s) {
        case ProfileSource::UserConfig:      return "user-config";
        case ProfileSource::ServiceManifest: return "service-manifest";
        case ProfileSource::ClientTelemetry: return "client-telemetry";
    }
    return "user-config";
}

const std::map<std::string, std::vector<std::string>>& profile_groups() {
    static const std::map<std::string, std::vector<std::string>> g{
        {"identity", {"os", "os_version"}},
        {"capabilities", {"capabilities"}},
        {"performance", {"cpu_cores", "memory_gb", "gpus", "disk_gb"}},
        {"paths", {"paths"}},
        {"network", {"host", "ip"}},
    };
    return g;
}

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
    throw Error(ErrorCode::SchemaViolation, key + ": " + why, {Violation{ErrorCode::SchemaViolation, why, {key}}});
}

std::string as_str(const Json& v, const std::string& key) {
    if (!v.is_string()) bad(key, "must be a string");
    return v.get<std::string>();
}

double as_num(const Json& v, const std::string& key) {
    if (!v.is_number()) bad(key, "must be a number");
    return v.get<double>();
}

std::vector<std::string> as_strs(const Json& v, const std::string& key) {
    if (!v.is_array()) bad(key, "must be an array of strings");
    std::vector<std::string> out;
    for (const auto& x : v) out.push_back(as_str(x, key));
    return out;
}

void apply_field(AgentProfile& p, const std::string& key, const Json& v) {
    if (key == "os") p.os = as_str(v, key);
    else if (key == "os_version") p.os_version = as_str(v, key);
    else if (key == "capabilities") p.capabilities = as_strs(v, key);
    else if (key == "cpu_cores") p.performance.cpu_cores = static_cast<int>(as_num(v, key));
    else if (key == "memory_gb") p.performance.memory_gb = as_num(v, key);
    else if (key == "gpus") p.performance.gpus = as_strs(v, key);
    else if (key == "disk_gb") p.performance.disk_gb = as_num(v, key);
    else if (key == "paths") {
        if (!v.is_object()) bad(key, "must be an object");
        p.paths.clear();
        for (const auto& [k, x] : v.items()) p.paths[k] = as_str(x, key + "." + k);
    } else if (key == "host" || key == "ip") {
        if (!p.network) p.network = NetworkInfo{};
        (key == "host" ? p.network->host : p.network->ip) = as_str(v, key);
    }
}

}  // namespace

void ProfileRegistry::merge(const std::string& agent_id, ProfileSource src, const Json& fields) {
    if (agent_id.empty()) bad("agent_id", "must not be empty");
    if (!fields.is_object() && !fields.is_null()) bad("profile", "must be an object");
    auto next = profiles_.count(agent_id) ? profiles_.at(agent_id) : AgentProfile{};
    next.agent_id = agent_id;
    for (const auto& [group, keys] : profile_groups()) {
        bool touched = false;
        for (const auto& k : keys)
            if (fields.contains(k)) {
                apply_field(next, k, fields[k]);
                touched = true;
            }
        if (touched) next.sources[group] = src;
    }
    profiles_[agent_id] = std::move(next);
}

const AgentProfile& ProfileRegistry::register_agent(const std::string& agent_id, const Json& user_config,
                                                    const Json& manifest, const Json& telemetry) {
    // Validate all three before touching the registry.
    ProfileRegistry scratch;
    scratch.merge(agent_id, ProfileSource::UserConfig, user_config);
    scratch.merge(agent_id, ProfileSource::ServiceManifest, manifest);
    scratch.merge(agent_id, ProfileSource::ClientTelemetry, telemetry);
    auto p = scratch.profiles_.at(agent_id);
    if (auto it = profiles_.find(agent_id); it != profiles_.end()) p.last_heartbeat = it->second.last_heartbeat;
    p.status = AgentStatus::Idle;
    profiles_[agent_id] = std::move(p);
    return profiles_.at(agent_id);
}

void ProfileRegistry::heartbeat(const std::string& agent_id, double t) {
    auto it = profiles_.find(agent_id);
    if (it == profiles_.end()) return;
    it->second.last_heartbeat = std::max(it->second.last_heartbeat, t);
}

void ProfileRegistry::set_status(const std::string& agent_id, AgentStatus s) {
    auto it = profiles_.find(agent_id);
    if (it != profiles_.end()) it->second.status = s;
}

const AgentProfile& ProfileRegistry::get(const std::string& agent_id) const {
    auto it = profiles_.find(agent_id);
    if (it == profiles_.end()) throw Error(ErrorCode::NotFound, "no profile for '" + agent_id + "'");
    return it->second;
}

std::vector<std::string> ProfileRegistry::pool() const {
    std::vector<std::string> out;
    for (const auto& [id, p] : profiles_)
        if (p.status != AgentStatus::Disconnected) out.push_back(id);
    return out;
}

Json to_json(const AgentProfile& p) {
    Json src = Json::object();
    for (const auto& [g, s] : p.sources) src[g] = to_string(s);
    Json j{{"agent_id", p.agent_id},
           {"status", to_string(p.status)},
           {"os", p.os},
           {"os_version", p.os_version},
           {"capabilities", p.capabilities},
           {"performance",
            {{"cpu_cores", p.performance.cpu_cores},
             {"memory_gb", p.performance.memory_gb},
             {"gpus", p.performance.gpus},
             {"disk_gb", p.performance.disk_gb}}},
           {"paths", p.paths},
           {"last_heartbeat", round_time(p.last_heartbeat)},
           {"sources", src}};
    if (p.network) j["network"] = {{"host", p.network->host}, {"ip", p.network->ip}};
    return j;
}

Json ProfileRegistry::to_json() const {
    Json out = Json::array();
    for (const auto& [id, p] : profiles_) out.push_back(aip::to_json(p));
    return out;
}

Json gpu_node_telemetry() {
    return Json{{"os", "linux"},
                {"cpu_cores", 96},
                {"memory_gb", 866.1},
                {"gpus", {"NVIDIA A100 80G", "NVIDIA A100 80G", "NVIDIA A100 80G", "NVIDIA A100 80G"}}};
}

}  // namespace constellation::aip
