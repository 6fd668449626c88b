#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "constellation/aip/profile.hpp"
#include "constellation/aip/resilience.hpp"
#include "constellation/aip/transport.hpp"
#include "constellation/orchestrator/dispatcher.hpp"

namespace constellation::aip {

struct ClientConfig {
    HeartbeatPolicy heartbeat;
    BackoffPolicy backoff;
    std::uint64_t seed = 0;
};

struct DeviceEntry {
    DeviceId id;
    Json user_config = Json::object();
};

// The constellation side of AIP. Talks to one device agent server per device
// and exposes the fleet to the orchestrator as a Dispatcher.
class ConstellationClient final : public Dispatcher {
  public:
    ConstellationClient(ControlContext& ctx, Transport& t, ClientConfig cfg, std::vector<DeviceEntry> devices);

    // Opens a session with every device and starts the heartbeat ticks.
    void start();
    void stop();

    DeviceAvailability availability(const DeviceId& device) const override;
    void dispatch(const TaskStar& task, Done done) override;
    void abandon(const TaskId& task) override;
    void on_availability_change(std::function<void()> cb) override { listeners_.push_back(std::move(cb)); }
    Json profiles() const override { return registry_.to_json(); }

    const ProfileRegistry& registry() const { return registry_; }
    const std::vector<ReconnectAttempt>& reconnect_log() const { return attempts_; }
    // (device, time) of every heartbeat-timeout detection.
    const std::vector<std::pair<DeviceId, double>>& disconnects() const { return disconnects_; }
    std::size_t synthesized_failures() const { return synthesized_; }
    std::size_t tasks_sent() const { return tasks_sent_; }
    std::optional<std::string> session_of(const DeviceId& d) const;

  private:
    enum class Phase { Registering, Active, Disconnected, Lost };
    struct Pending {
        std::string request_id;
        Done done;
    };
    struct Conn {
        Phase phase = Phase::Registering;
        std::string session;
        std::string info_request;
        int session_count = 0;
        double last_seen = 0.0;
        int attempt = 0;
        Rng rng;
        std::map<TaskId, Pending> pending;
    };

    void open_session(const DeviceId& d);
    void on_message(const NodeId& from, const AipMessage& m, bool duplicate);
    void on_task_end(const DeviceId& d, const body::TaskEnd& b);
    void tick();
    void disconnect(const DeviceId& d);
    void try_reconnect(const DeviceId& d);
    void notify();
    void refresh_status(const DeviceId& d);

    ControlContext& ctx_;
    Endpoint ep_;
    ClientConfig cfg_;
    std::map<DeviceId, Json> user_config_;
    std::map<DeviceId, Conn> conns_;
    ProfileRegistry registry_;
    std::vector<std::function<void()>> listeners_;
    std::vector<ReconnectAttempt> attempts_;
    std::vector<std::pair<DeviceId, double>> disconnects_;
    std::optional<TimerId> tick_timer_;
    std::size_t synthesized_ = 0;
    std::size_t tasks_sent_ = 0;
    std::uint64_t request_counter_ = 0;
};

}  // namespace constellation::aip
