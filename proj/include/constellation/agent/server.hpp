#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "constellation/agent/executor.hpp"
#include "constellation/agent/fsm.hpp"
#include "constellation/agent/reasoner.hpp"
#include "constellation/aip/resilience.hpp"
#include "constellation/aip/transport.hpp"

namespace constellation::agent {

struct ServerConfig {
    std::vector<StrategyKind> strategies = kLinuxPipeline;
    int step_limit = 25;
    double reasoning_latency = 0.5;
    aip::HeartbeatPolicy heartbeat;
};

// One entry per finished or aborted task.
struct ServedTask {
    TaskId task;
    std::string session;
    std::string status;  // COMPLETED | FAILED | ABORTED
    std::optional<std::string> failure_reason;
    int steps = 0;
    double start = 0.0;
    double end = 0.0;
};

// Device agent server: owns the FSM and the strategy pipeline, talks to the
// constellation upstream and to its client downstream.
class DeviceAgentServer {
  public:
    DeviceAgentServer(ControlContext& ctx, aip::Transport& t, Json manifest, std::shared_ptr<Reasoner> reasoner,
                      ServerConfig cfg = {});

    void start();
    void stop();

    const aip::NodeId& id() const { return ep_.self(); }
    bool client_registered() const { return client_.has_value(); }
    const std::vector<ServedTask>& served() const { return served_; }
    // (step, strategy) for every strategy run, in order.
    const std::vector<std::pair<int, StrategyKind>>& strategy_trace() const { return trace_; }
    const AgentMemory& memory() const { return memory_; }
    std::size_t aborted() const { return aborted_; }
    std::size_t duplicate_tasks() const { return duplicate_tasks_; }
    bool busy() const { return job_ != nullptr; }
    std::size_t queued() const { return queue_.size(); }

  private:
    struct Client {
        aip::NodeId node;
        std::string session;
        Json telemetry;
    };
    struct Upstream {
        aip::NodeId node;
        std::string session;
        double last_ack = 0.0;
        bool open = false;
        std::optional<std::string> info_request;  // answered once the client registers
    };
    struct Job {
        std::uint64_t serial = 0;
        std::string session;
        std::string request_id;
        TaskId task_id;
        Json spec;
        AgentState state = AgentState::Continue;
        int step = 0;
        std::size_t stage = 0;
        double start = 0.0;
        Decision decision;
        std::vector<aip::ActionResult> results;
        std::optional<std::string> awaiting;  // COMMAND response_id
        std::vector<Json> outputs;
        Json sys_info;
    };

    void on_message(const aip::NodeId& from, const aip::AipMessage& m, bool duplicate);
    void answer_info();
    void tick();
    void abort_all(const std::string& why);
    void next_job();
    void round();
    void run_stage();
    void after_pipeline();
    void finish(const std::string& status, std::optional<Json> result, std::optional<std::string> error,
                std::optional<FailureReason> reason);
    void send_command(std::vector<aip::Action> actions);
    bool alive(std::uint64_t serial) const { return job_ && job_->serial == serial; }

    ControlContext& ctx_;
    aip::Endpoint ep_;
    Json manifest_;
    std::shared_ptr<Reasoner> reasoner_;
    ServerConfig cfg_;
    std::optional<Client> client_;
    Upstream up_;
    std::deque<std::unique_ptr<Job>> queue_;
    std::unique_ptr<Job> job_;
    std::set<std::pair<std::string, TaskId>> seen_tasks_;
    std::vector<ServedTask> served_;
    std::vector<std::pair<int, StrategyKind>> trace_;
    AgentMemory memory_;
    std::optional<TimerId> tick_timer_;
    std::uint64_t command_counter_ = 0;
    std::uint64_t job_serial_ = 0;
    std::size_t aborted_ = 0;
    std::size_t duplicate_tasks_ = 0;
};

// Device agent client: registers with its server and executes commands, one
// batch at a time.
class DeviceAgentClient {
  public:
    DeviceAgentClient(ControlContext& ctx, aip::Transport& t, aip::NodeId server, std::shared_ptr<Executor> exec,
                      Json telemetry);

    void start();

    bool registered() const { return registered_; }
    std::size_t commands_run() const { return commands_run_; }
    // Duplicate COMMAND frames seen; each one is a protocol violation.
    std::size_t command_replays() const { return command_replays_; }
    std::size_t state_transitions() const { return 0; }  // the client never decides one
    bool busy() const { return busy_ || !pending_.empty(); }

  private:
    struct Batch {
        std::string session;
        aip::body::Command cmd;
    };
    void on_message(const aip::NodeId& from, const aip::AipMessage& m, bool duplicate);
    void run_next();
    void run_action(std::size_t i);

    ControlContext& ctx_;
    aip::Endpoint ep_;
    aip::NodeId server_;
    std::shared_ptr<Executor> exec_;
    Json telemetry_;
    std::string session_;
    bool registered_ = false;
    bool busy_ = false;
    std::deque<Batch> pending_;
    std::optional<Batch> current_;
    std::vector<aip::ActionResult> results_;
    std::size_t commands_run_ = 0;
    std::size_t command_replays_ = 0;
};

}  // namespace constellation::agent
