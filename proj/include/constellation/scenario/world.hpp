#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "constellation/agent/server.hpp"
#include "constellation/aip/client.hpp"
#include "constellation/sim/clock.hpp"
#include "constellation/sim/network.hpp"

namespace constellation::scenario {

inline const std::string kConstellationNode = "constellation";

struct DeviceSpec {
    DeviceId id;
    Json user_config = Json::object();
    Json manifest = Json::object();
    Json telemetry = Json::object();
    Json executor = Json::object();  // executor table
    Json reasoner = Json::object();  // reasoner script
    agent::ServerConfig server;
    sim::Latency local{0.0005, 0.0005};  // server <-> client
    bool start_client = true;
};

struct WorldConfig {
    std::uint64_t seed = 0;
    std::vector<DeviceSpec> devices;
    sim::Latency wan{0.001, 0.010};  // constellation <-> device servers
    std::map<DeviceId, std::vector<sim::Outage>> outages;
    aip::ClientConfig client;
    std::set<std::string> duplicate_labels;
};

// Constellation client, device servers and device clients wired over one
// simulated network.
class World {
  public:
    explicit World(WorldConfig cfg);
    World(const World&) = delete;
    World& operator=(const World&) = delete;

    void start();

    sim::VirtualClock& clock() { return clock_; }
    sim::Network& network() { return *net_; }
    aip::ConstellationClient& client() { return *client_; }
    agent::DeviceAgentServer& server(const DeviceId& d) { return *devices_.at(d).server; }
    agent::DeviceAgentClient& device_client(const DeviceId& d) { return *devices_.at(d).client; }
    std::vector<DeviceId> device_ids() const;

    // Runs the clock until no device is working and no frame is in flight,
    // or `limit` more seconds have passed.
    void drain(double limit = 120.0);

    static std::string client_node(const DeviceId& d) { return d + "/client"; }

  private:
    struct Device {
        std::unique_ptr<aip::SimTransport> server_transport;
        std::unique_ptr<aip::SimTransport> client_transport;
        std::unique_ptr<agent::DeviceAgentServer> server;
        std::unique_ptr<agent::DeviceAgentClient> client;
        bool start_client = true;
    };
    bool idle() const;

    WorldConfig cfg_;
    sim::VirtualClock clock_;
    std::unique_ptr<sim::Network> net_;
    std::unique_ptr<aip::SimTransport> constellation_transport_;
    std::unique_ptr<aip::ConstellationClient> client_;
    std::map<DeviceId, Device> devices_;
};

}  // namespace constellation::scenario
