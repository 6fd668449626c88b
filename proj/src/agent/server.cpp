#include "constellation/agent/server.hpp"

#include "constellation/core/event.hpp"
#include "constellation/error.hpp"
#include "constellation/util/log.hpp"

namespace constellation::agent {

using namespace aip;

DeviceAgentServer::DeviceAgentServer(ControlContext& ctx, Transport& t, Json manifest,
                                     std::shared_ptr<Reasoner> reasoner, ServerConfig cfg)
    : ctx_(ctx), ep_(t), manifest_(std::move(manifest)), reasoner_(std::move(reasoner)), cfg_(std::move(cfg)) {
    ep_.on_message([this](const NodeId& from, const AipMessage& m, bool dup) { on_message(from, m, dup); });
}

void DeviceAgentServer::start() {
    tick_timer_ = ctx_.post_after(cfg_.heartbeat.next_tick(ctx_.now()) - ctx_.now(), [this] { tick(); });
}

void DeviceAgentServer::stop() {
    if (tick_timer_) ctx_.cancel(*tick_timer_);
    tick_timer_.reset();
}

void DeviceAgentServer::on_message(const NodeId& from, const AipMessage& m, bool) {
    const auto session = m.session_id.value_or("");
    if (auto* r = std::get_if<body::Register>(&m.body)) {
        // Re-registration refreshes the telemetry; same input, same state.
        client_ = Client{from, session, r->metadata};
        ep_.send(from, body::Heartbeat{ctx_.now(), std::string("OK")}, session);
        answer_info();
        return;
    }
    if (auto* q = std::get_if<body::DeviceInfoRequest>(&m.body)) {
        if (up_.open && up_.session != session) abort_all("superseded by session " + session);
        up_.node = from;
        up_.session = session;
        up_.last_ack = ctx_.now();
        up_.open = true;
        up_.info_request = q->request_id;
        answer_info();
        return;
    }
    if (auto* cr = std::get_if<body::CommandResults>(&m.body)) {
        if (!client_ || from != client_->node) return;
        if (!job_ || job_->awaiting != cr->prev_response_id) return;  // aborted task or duplicate
        job_->awaiting.reset();
        if (cfg_.strategies[job_->stage] == StrategyKind::DataCollection) {
            if (!cr->action_results.empty()) job_->sys_info = cr->action_results.front().value;
        } else {
            job_->results = cr->action_results;
            for (const auto& r : cr->action_results) job_->outputs.push_back(r.value);
        }
        ++job_->stage;
        run_stage();
        return;
    }
    if (auto* e = std::get_if<body::Error>(&m.body)) {
        log::warn("agent", id() + ": " + from + " reported " + e->error);
        return;
    }
    // Everything below belongs to the upstream session.
    if (!up_.open || from != up_.node || session != up_.session) return;
    up_.last_ack = ctx_.now();
    if (auto* t = std::get_if<body::Task>(&m.body)) {
        if (!seen_tasks_.insert({session, t->task_id}).second) {
            ++duplicate_tasks_;
            ep_.send(from, body::Heartbeat{ctx_.now(), std::string("OK")}, session);
            return;
        }
        auto j = std::make_unique<Job>();
        j->serial = ++job_serial_;
        j->session = session;
        j->request_id = t->request_id;
        j->task_id = t->task_id;
        j->spec = t->task;
        if (!j->spec.contains("description")) j->spec["description"] = t->request;
        queue_.push_back(std::move(j));
        next_job();
    }
}

void DeviceAgentServer::answer_info() {
    if (!up_.open || !up_.info_request || !client_) return;
    Json result{{"agent_id", id()}, {"manifest", manifest_}, {"telemetry", client_->telemetry}};
    ep_.send(up_.node, body::DeviceInfoResponse{*up_.info_request, result}, up_.session);
    up_.info_request.reset();
}

void DeviceAgentServer::tick() {
    tick_timer_.reset();
    if (up_.open) {
        if (cfg_.heartbeat.expired(up_.last_ack, ctx_.now())) {
            log::info("agent", id() + ": constellation unreachable, aborting tasks");
            abort_all("constellation unreachable");
            up_.open = false;
        } else {
            ep_.send(up_.node, body::Heartbeat{ctx_.now(), std::nullopt}, up_.session);
        }
    }
    tick_timer_ = ctx_.post_after(cfg_.heartbeat.interval, [this] { tick(); });
}

void DeviceAgentServer::abort_all(const std::string& why) {
    auto record = [&](const Job& j) {
        served_.push_back({j.task_id, j.session, "ABORTED", why, j.step, j.start, ctx_.now()});
        ++aborted_;
    };
    if (job_) record(*job_);
    for (const auto& j : queue_) record(*j);
    job_.reset();
    queue_.clear();
    memory_.clear();
}

void DeviceAgentServer::next_job() {
    if (job_ || queue_.empty()) return;
    job_ = std::move(queue_.front());
    queue_.pop_front();
    job_->start = ctx_.now();
    memory_.clear();
    if (job_->spec.value("description", "").empty()) {
        finish("FAILED", std::nullopt, "task has an empty description", FailureReason::ExecutionError);
        return;
    }
    if (!client_) {
        finish("FAILED", std::nullopt, "ClientUnavailable: no client registered with " + id(),
               FailureReason::AgentDisconnected);
        return;
    }
    round();
}

void DeviceAgentServer::round() {
    ++job_->step;
    if (job_->step > cfg_.step_limit) {
        finish("FAILED", std::nullopt, "StepLimitExceeded: more than " + std::to_string(cfg_.step_limit) + " steps",
               FailureReason::Timeout);
        return;
    }
    job_->decision = Decision{};
    job_->results.clear();
    job_->stage = 0;
    run_stage();
}

void DeviceAgentServer::run_stage() {
    if (job_->stage >= cfg_.strategies.size()) {
        after_pipeline();
        return;
    }
    auto kind = cfg_.strategies[job_->stage];
    trace_.emplace_back(job_->step, kind);
    switch (kind) {
        case StrategyKind::DataCollection:
            send_command({Action{"", "SYS_INFO", Json::object()}});
            return;
        case StrategyKind::LlmInteraction: {
            auto serial = job_->serial;
            ctx_.post_after(cfg_.reasoning_latency, [this, serial] {
                if (!alive(serial)) return;
                try {
                    job_->decision = reasoner_->decide({job_->spec, job_->step, &memory_});
                } catch (const Error& e) {
                    finish("FAILED", std::nullopt, e.what(), FailureReason::ExecutionError);
                    return;
                }
                ++job_->stage;
                run_stage();
            });
            return;
        }
        case StrategyKind::ActionExecution:
            if (job_->decision.commands.empty()) break;
            send_command(job_->decision.commands);
            return;
        case StrategyKind::MemoryUpdate:
            memory_.append({job_->step, job_->decision.commands, job_->results, to_json(job_->decision)});
            break;
    }
    ++job_->stage;
    run_stage();
}

void DeviceAgentServer::after_pipeline() {
    auto proposed = job_->decision.next_state;
    if (job_->decision.on_error)
        for (const auto& r : job_->results)
            if (r.status != "OK") proposed = *job_->decision.on_error;
    auto step = fsm_step(job_->state, proposed);
    job_->state = step.next;
    if (!step.round_end) {
        auto serial = job_->serial;
        ctx_.post([this, serial] {
            if (alive(serial)) round();
        });
        return;
    }
    if (job_->state == AgentState::Finish) {
        Json result{{"summary", job_->decision.summary},
                    {"duration", round_time(ctx_.now() - job_->start)},
                    {"steps", job_->step},
                    {"outputs", job_->outputs}};
        finish("COMPLETED", result, std::nullopt, std::nullopt);
    } else {
        auto why = job_->decision.reason.empty() ? std::string("agent gave up") : job_->decision.reason;
        Json result{{"summary", job_->decision.summary}, {"steps", job_->step}, {"outputs", job_->outputs}};
        finish("FAILED", result, why, FailureReason::ExecutionError);
    }
}

void DeviceAgentServer::finish(const std::string& status, std::optional<Json> result,
                               std::optional<std::string> error, std::optional<FailureReason> reason) {
    std::optional<std::string> reason_s;
    if (reason) reason_s = std::string(to_string(*reason));
    served_.push_back({job_->task_id, job_->session, status, reason_s, job_->step, job_->start, ctx_.now()});
    if (up_.open && up_.session == job_->session)
        ep_.send(up_.node, body::TaskEnd{job_->request_id, job_->task_id, status, result, error, reason_s},
                 up_.session);
    job_.reset();
    ctx_.post([this] { next_job(); });
}

void DeviceAgentServer::send_command(std::vector<Action> actions) {
    int n = 0;
    for (auto& a : actions)
        if (a.id.empty()) a.id = "a" + std::to_string(++n);
    auto rid = id() + ":cmd-" + std::to_string(++command_counter_);
    job_->awaiting = rid;
    ep_.send(client_->node, body::Command{rid, job_->task_id, std::move(actions)}, client_->session);
}

// ---------------------------------------------------------------------------

DeviceAgentClient::DeviceAgentClient(ControlContext& ctx, Transport& t, NodeId server, std::shared_ptr<Executor> exec,
                                     Json telemetry)
    : ctx_(ctx), ep_(t), server_(std::move(server)), exec_(std::move(exec)), telemetry_(std::move(telemetry)) {
    ep_.on_message([this](const NodeId& from, const AipMessage& m, bool dup) { on_message(from, m, dup); });
}

void DeviceAgentClient::start() {
    session_ = ep_.self() + "#1";
    ep_.send(server_, body::Register{ep_.self(), telemetry_}, session_);
}

void DeviceAgentClient::on_message(const NodeId& from, const AipMessage& m, bool duplicate) {
    if (from != server_) return;
    if (auto* hb = std::get_if<body::Heartbeat>(&m.body)) {
        if (hb->status && *hb->status == "OK") registered_ = true;
        return;
    }
    if (auto* e = std::get_if<body::Error>(&m.body)) {
        log::warn("agent", ep_.self() + ": server reported " + e->error);
        return;
    }
    if (auto* c = std::get_if<body::Command>(&m.body)) {
        if (duplicate) {
            // COMMAND is never replayed.
            ++command_replays_;
            return;
        }
        pending_.push_back({m.session_id.value_or(session_), *c});
        run_next();
    }
}

void DeviceAgentClient::run_next() {
    if (busy_ || pending_.empty()) return;
    busy_ = true;
    current_ = std::move(pending_.front());
    pending_.pop_front();
    results_.clear();
    run_action(0);
}

void DeviceAgentClient::run_action(std::size_t i) {
    const auto& actions = current_->cmd.actions;
    if (i == actions.size()) {
        ep_.send(server_, body::CommandResults{current_->cmd.response_id, results_}, current_->session);
        current_.reset();
        busy_ = false;
        run_next();
        return;
    }
    const auto& a = actions[i];
    ExecResult r;
    try {
        r = exec_->execute(a);
    } catch (const Error& e) {
        r.status = "ERROR";
        r.value = nullptr;
        r.error = e.what();
        r.duration = 0.0;
    }
    ++commands_run_;
    results_.push_back(ActionResult{a.id, r.status, r.value, r.error});
    ctx_.post_after(r.duration, [this, i] { run_action(i + 1); });
}

}  // namespace constellation::agent
