#include "constellation/aip/client.hpp"

#include "constellation/core/serialize.hpp"
#include "constellation/error.hpp"
#include "constellation/util/log.hpp"

namespace constellation::aip {

ConstellationClient::ConstellationClient(ControlContext& ctx, Transport& t, ClientConfig cfg,
                                         std::vector<DeviceEntry> devices)
    : ctx_(ctx), ep_(t), cfg_(cfg) {
    for (auto& d : devices) {
        user_config_[d.id] = d.user_config;
        Conn c;
        c.rng = Rng(derive_seed(cfg_.seed, "backoff:" + d.id));
        conns_.emplace(d.id, std::move(c));
    }
    ep_.on_message([this](const NodeId& from, const AipMessage& m, bool dup) { on_message(from, m, dup); });
}

void ConstellationClient::start() {
    for (const auto& [d, c] : conns_) open_session(d);
    tick_timer_ = ctx_.post_after(cfg_.heartbeat.next_tick(ctx_.now()) - ctx_.now(), [this] { tick(); });
}

void ConstellationClient::stop() {
    if (tick_timer_) ctx_.cancel(*tick_timer_);
    tick_timer_.reset();
}

std::optional<std::string> ConstellationClient::session_of(const DeviceId& d) const {
    auto it = conns_.find(d);
    if (it == conns_.end() || it->second.phase != Phase::Active) return std::nullopt;
    return it->second.session;
}

void ConstellationClient::open_session(const DeviceId& d) {
    auto& c = conns_.at(d);
    c.session = d + "#" + std::to_string(++c.session_count);
    c.info_request = "info-" + c.session;
    c.phase = Phase::Registering;
    c.last_seen = ctx_.now();
    ep_.send(d, body::DeviceInfoRequest{d, c.info_request}, c.session);
}

void ConstellationClient::notify() {
    for (auto& l : listeners_) l();
}

void ConstellationClient::refresh_status(const DeviceId& d) {
    const auto& c = conns_.at(d);
    if (c.phase == Phase::Active) registry_.set_status(d, c.pending.empty() ? AgentStatus::Idle : AgentStatus::Busy);
}

void ConstellationClient::on_message(const NodeId& from, const AipMessage& m, bool) {
    auto it = conns_.find(from);
    if (it == conns_.end()) return;
    auto& c = it->second;
    const bool current = m.session_id && *m.session_id == c.session;

    if (auto* hb = std::get_if<body::Heartbeat>(&m.body)) {
        // A heartbeat alone does not bring a DISCONNECTED agent back.
        registry_.heartbeat(from, ctx_.now());
        if (c.phase == Phase::Active && current) {
            c.last_seen = ctx_.now();
            if (!hb->status) ep_.send(from, body::Heartbeat{ctx_.now(), std::string("OK")}, c.session);
        }
        return;
    }
    if (auto* r = std::get_if<body::DeviceInfoResponse>(&m.body)) {
        if (c.phase != Phase::Registering || !current || r->response_id != c.info_request) return;
        try {
            const auto& res = r->result;
            registry_.register_agent(from, user_config_[from], res.value("manifest", Json::object()),
                                     res.value("telemetry", Json::object()));
        } catch (const Error& e) {
            log::warn("aip", "profile of " + from + " rejected: " + e.what());
            return;
        }
        registry_.heartbeat(from, ctx_.now());
        c.phase = Phase::Active;
        c.last_seen = ctx_.now();
        c.attempt = 0;
        refresh_status(from);
        log::info("aip", from + " registered on session " + c.session);
        notify();
        return;
    }
    if (!current) return;
    if (c.phase == Phase::Active) c.last_seen = ctx_.now();
    if (auto* te = std::get_if<body::TaskEnd>(&m.body)) {
        on_task_end(from, *te);
    } else if (auto* er = std::get_if<body::Error>(&m.body)) {
        log::warn("aip", from + " reported: " + er->error);
    }
}

void ConstellationClient::on_task_end(const DeviceId& d, const body::TaskEnd& b) {
    auto& c = conns_.at(d);
    auto it = c.pending.find(b.task_id);
    // Duplicates and ends of abandoned tasks land here.
    if (it == c.pending.end() || it->second.request_id != b.request_id) return;
    auto done = std::move(it->second.done);
    c.pending.erase(it);

    OrchestratorEvent e;
    e.task_id = b.task_id;
    e.device = d;
    e.timestamp = ctx_.now();
    if (b.status == "COMPLETED") {
        e.kind = EventKind::TaskCompleted;
        e.payload = b.result.value_or(Json::object());
    } else {
        e.kind = EventKind::TaskFailed;
        Json p{{"error", b.error.value_or("task failed")}};
        if (b.result) p["result"] = *b.result;
        e.payload = p;
        std::optional<FailureReason> r;
        if (b.failure_reason) r = parse_failure_reason(*b.failure_reason);
        e.failure_reason = r.value_or(FailureReason::ExecutionError);
    }
    refresh_status(d);
    done(std::move(e));
}

void ConstellationClient::tick() {
    tick_timer_.reset();
    std::vector<DeviceId> gone;
    for (const auto& [d, c] : conns_)
        if ((c.phase == Phase::Active || c.phase == Phase::Registering) &&
            cfg_.heartbeat.expired(c.last_seen, ctx_.now()))
            gone.push_back(d);
    for (const auto& d : gone) disconnect(d);
    tick_timer_ = ctx_.post_after(cfg_.heartbeat.interval, [this] { tick(); });
}

void ConstellationClient::disconnect(const DeviceId& d) {
    auto& c = conns_.at(d);
    log::info("aip", d + " missed " + std::to_string(cfg_.heartbeat.missed) + " heartbeats");
    disconnects_.emplace_back(d, ctx_.now());
    c.phase = Phase::Disconnected;
    registry_.set_status(d, AgentStatus::Disconnected);
    auto pending = std::move(c.pending);
    c.pending.clear();
    for (auto& [task, p] : pending) {
        OrchestratorEvent e;
        e.kind = EventKind::TaskFailed;
        e.task_id = task;
        e.device = d;
        e.failure_reason = FailureReason::AgentDisconnected;
        e.payload = Json{{"error", "device " + d + " disconnected"}};
        e.timestamp = ctx_.now();
        ++synthesized_;
        p.done(std::move(e));
    }
    notify();
    c.attempt = 0;
    ctx_.post_after(cfg_.backoff.delay(0, c.rng), [this, d] { try_reconnect(d); });
}

void ConstellationClient::try_reconnect(const DeviceId& d) {
    auto& c = conns_.at(d);
    if (c.phase != Phase::Disconnected) return;
    ++c.attempt;
    bool ok = ep_.probe(d);
    attempts_.push_back({d, c.attempt, ctx_.now(), ok});
    if (ok) {
        open_session(d);
        return;
    }
    if (c.attempt >= cfg_.backoff.max_attempts) {
        c.phase = Phase::Lost;
        log::warn("aip", d + ": AttemptsExhausted after " + std::to_string(c.attempt) + " attempts");
        notify();
        return;
    }
    ctx_.post_after(cfg_.backoff.delay(c.attempt, c.rng), [this, d] { try_reconnect(d); });
}

DeviceAvailability ConstellationClient::availability(const DeviceId& device) const {
    auto it = conns_.find(device);
    if (it == conns_.end()) return DeviceAvailability::Unknown;
    switch (it->second.phase) {
        case Phase::Active: return DeviceAvailability::Available;
        case Phase::Lost:   return DeviceAvailability::Lost;
        default:            return DeviceAvailability::Unavailable;
    }
}

void ConstellationClient::dispatch(const TaskStar& task, Done done) {
    auto it = conns_.find(task.device);
    if (it == conns_.end() || it->second.phase != Phase::Active)
        throw Error(ErrorCode::DispatchError, "PeerDisconnected: device '" + task.device + "' is not connected");
    auto& c = it->second;
    auto rid = "req-" + std::to_string(++request_counter_);
    c.pending[task.id] = Pending{rid, std::move(done)};
    ++tasks_sent_;
    ep_.send(task.device, body::Task{rid, task.id, task.description, to_json(task.spec())}, c.session);
    refresh_status(task.device);
}

void ConstellationClient::abandon(const TaskId& task) {
    for (auto& [d, c] : conns_)
        if (c.pending.erase(task)) refresh_status(d);
}

}  // namespace constellation::aip
