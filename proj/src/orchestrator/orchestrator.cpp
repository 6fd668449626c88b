#include "constellation/orchestrator/orchestrator.hpp"

#include <algorithm>

#include "constellation/core/serialize.hpp"
#include "constellation/error.hpp"
#include "constellation/util/log.hpp"

namespace constellation {

namespace {

// What a started task must keep: its spec and its incoming edges.
Json frozen_view(const TaskConstellation& c, const TaskId& id) {
    Json in = Json::array();
    for (const auto& [eid, e] : c.edges())
        if (e.to_task == id) in.push_back(to_json(e));
    return Json{{"spec", to_json(c.task(id).spec())}, {"incoming", in}};
}

}  // namespace

Orchestrator::Orchestrator(ControlContext& ctx, Planner& planner, Dispatcher& dispatcher, OrchestratorConfig cfg,
                           const ConditionRegistry& conditions)
    : ctx_(ctx), planner_(planner), dispatcher_(dispatcher), cfg_(cfg), conditions_(conditions) {
    dispatcher_.on_availability_change([this] {
        ctx_.post([this] {
            if (!finished_ && started_ && !held_) {
                dispatch_ready();
                check_end();
            }
        });
    });
}

void Orchestrator::publish(OrchestratorEvent e) {
    e.timestamp = ctx_.now();
    report_.events.push_back(e);
    bus_.publish(e);
}

void Orchestrator::start(TaskConstellation c) {
    auto vs = validate(c);
    if (!vs.empty()) throw Error(ErrorCode::ValidationFailed, "initial constellation is invalid", vs);
    c_ = std::move(c);
    committed_version_ = c_.version();
    report_.request = c_.request();
    report_.initial = c_;
    report_.started_at = ctx_.now();
    started_ = true;
    for (const auto& [id, t] : c_.tasks()) report_.timings[id].device = t.device;
    ctx_.post_after(cfg_.max_time, [this] {
        if (finished_) return;
        report_.checks.guard_hit = true;
        log::warn("orchestrator", "max time reached, stopping run");
        finish();
    });
    ctx_.post([this] {
        dispatch_ready();
        check_end();
    });
}

void Orchestrator::start_request(const std::string& request) {
    PlannerInput in;
    in.mode = PlannerMode::Create;
    in.request = request;
    in.profiles = dispatcher_.profiles();
    PlannerOutput out;
    TaskConstellation c(request);
    try {
        out = planner_.create(in);
        pstate_ = fsm_advance(pstate_, out.next_state);
        c = apply_delta(c, out.delta).constellation;
    } catch (const Error& e) {
        report_.planner_trace.push_back({-1, ctx_.now(), PlannerMode::Create, out, std::string(e.what())});
        report_.request = request;
        report_.initial = c;
        report_.final_constellation = c;
        report_.started_at = report_.finished_at = ctx_.now();
        report_.error = std::string("PlannerError: ") + e.what();
        planner_error_ = true;
        started_ = true;
        finish();
        return;
    }
    report_.planner_trace.push_back({-1, ctx_.now(), PlannerMode::Create, out, std::nullopt});
    report_.planner_result = out.result;
    start(std::move(c));
    if (is_terminal(pstate_)) enter_terminal();
}

void Orchestrator::enqueue(OrchestratorEvent e) {
    ctx_.post([this, e = std::move(e)]() mutable { on_event(std::move(e)); });
}

void Orchestrator::on_event(OrchestratorEvent e) {
    if (finished_) return;
    e.timestamp = ctx_.now();
    const TaskId id = e.task_id.value_or("");
    bool expected = inflight_.erase(id) > 0 || pending_failure_.count(id) > 0;
    if (!expected) {
        report_.dropped_events.push_back({e, "late: task is not awaiting an outcome"});
        log::info("orchestrator", "dropped late event for " + id);
        return;
    }
    if (auto it = timeouts_.find(id); it != timeouts_.end()) {
        ctx_.cancel(it->second);
        timeouts_.erase(it);
    }
    if (c_.has_task(id)) report_.timings[id].end = ctx_.now();
    queue_.push_back(e);
    publish(e);
    if (!edit_posted_) {
        edit_posted_ = true;
        ctx_.post([this] {
            edit_posted_ = false;
            try_edit();
        });
    }
}

void Orchestrator::try_edit() {
    if (finished_ || held_ || queue_.empty()) return;
    held_ = true;
    cycle_begin();
}

void Orchestrator::fold_event(const OrchestratorEvent& e) {
    const TaskId id = e.task_id.value_or("");
    if (!c_.has_task(id)) {
        report_.dropped_events.push_back({e, "UnknownTask: task was removed"});
        return;
    }
    TaskOutcome o;
    o.task_id = id;
    o.status = e.kind == EventKind::TaskCompleted ? TaskStatus::Completed : TaskStatus::Failed;
    o.result = e.payload;
    o.failure_reason = e.failure_reason;
    if (o.status == TaskStatus::Failed && !o.failure_reason) o.failure_reason = FailureReason::ExecutionError;
    try {
        c_.fold(o);
    } catch (const Error& err) {
        report_.dropped_events.push_back({e, err.what()});
        return;
    }
    pending_failure_.erase(id);
    assignments_.erase(id);
    assigned_at_dispatch_.erase(id);
    check_i1();
}

void Orchestrator::fold_arrived() {
    for (const auto& e : queue_) fold_event(e);
}

void Orchestrator::cycle_begin() {
    current_ = EditCycleRecord{};
    current_.index = cycles_++;
    current_.start = ctx_.now();
    current_.phi_before = phi();
    current_.version_before = c_.version();

    std::vector<OrchestratorEvent> batch(queue_.begin(), queue_.end());
    queue_.clear();
    std::stable_sort(batch.begin(), batch.end(), [](const auto& a, const auto& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        return a.task_id.value_or("") < b.task_id.value_or("");
    });
    current_.batch = batch;
    for (const auto& e : batch) fold_event(e);

    if (is_terminal(pstate_) || planner_error_) {
        // Draining after the planner stopped: fold only.
        current_.planner_called = false;
        current_.end = ctx_.now();
        current_.version_after = c_.version();
        current_.planner_state = pstate_;
        current_.phi_after = phi();
        if (current_.phi_after >= current_.phi_before) ++report_.checks.phi_violations;
        report_.edit_cycles.push_back(current_);
        if (!queue_.empty()) {
            cycle_begin();
            return;
        }
        release();
        return;
    }

    PlannerInput in;
    in.mode = PlannerMode::Edit;
    in.request = c_.request();
    in.profiles = dispatcher_.profiles();
    in.snapshot = serialize(c_);
    in.events = batch;
    PlannerOutput out;
    try {
        out = planner_.edit(in);
    } catch (const Error& e) {
        report_.planner_trace.push_back({current_.index, ctx_.now(), PlannerMode::Edit, out, std::string(e.what())});
        current_.attempts = 1;
        planner_failed(e.what());
        return;
    }
    current_.attempts = 1;
    ctx_.post_after(cfg_.planner_latency, [this, in, out] { cycle_commit(in, out, 1); });
}

void Orchestrator::cycle_commit(PlannerInput input, PlannerOutput out, int attempt) {
    if (finished_) return;
    // Outcomes that arrived while the planner was thinking. They stay queued
    // for the next call; folding is idempotent.
    fold_arrived();

    std::string rejection;
    ApplyResult applied;
    try {
        applied = apply_delta(c_, out.delta);
        // Caught here, so a rejected delta never reaches the committed state.
        if (!respects_locality(c_, applied.constellation)) {
            throw Error(ErrorCode::ValidationFailed, "delta modifies a task that is no longer PENDING");
        }
        fsm_advance(pstate_, out.next_state);
    } catch (const Error& e) {
        rejection = e.what();
    }
    if (!rejection.empty()) {
        report_.planner_trace.push_back({current_.index, ctx_.now(), PlannerMode::Edit, out, rejection});
        current_.rejections.push_back(rejection);
        if (attempt > cfg_.max_rejections) {
            planner_failed("delta rejected " + std::to_string(attempt) + " times: " + rejection);
            return;
        }
        input.snapshot = serialize(c_);
        input.rejection = rejection;
        PlannerOutput retry;
        try {
            retry = planner_.edit(input);
        } catch (const Error& e) {
            planner_failed(e.what());
            return;
        }
        current_.attempts = attempt + 1;
        ctx_.post_after(cfg_.planner_latency,
                        [this, input, retry, attempt] { cycle_commit(input, retry, attempt + 1); });
        return;
    }

    report_.planner_trace.push_back({current_.index, ctx_.now(), PlannerMode::Edit, out, std::nullopt});
    c_ = std::move(applied.constellation);
    committed_version_ = c_.version();
    if (!validate(c_).empty()) ++report_.checks.i2_violations;
    for (const auto& [id, view] : frozen_)
        if (!c_.has_task(id) || frozen_view(c_, id) != view) ++report_.checks.i3_violations;
    for (const auto& o : out.delta.ops)
        if (auto* a = std::get_if<op::AddTask>(&o)) {
            current_.added_tasks.push_back(a->spec.id);
            report_.timings[a->spec.id].device = a->spec.device;
        }
    for (const auto& [id, t] : c_.tasks()) report_.timings[id].device = t.device;
    current_.delta = out.delta;
    current_.summary = applied.summary;
    current_.version_after = c_.version();

    OrchestratorEvent mod;
    mod.kind = EventKind::ConstellationModified;
    mod.payload = Json{{"version", c_.version()}, {"summary", to_json(applied.summary)}};
    publish(mod);

    pstate_ = out.next_state;
    report_.planner_result = out.result;
    current_.planner_state = pstate_;
    current_.end = ctx_.now();
    if (is_terminal(pstate_)) enter_terminal();
    current_.phi_after = phi();
    if (current_.phi_after >= current_.phi_before) ++report_.checks.phi_violations;
    report_.edit_cycles.push_back(current_);

    if (!queue_.empty()) {
        cycle_begin();
        return;
    }
    release();
}

void Orchestrator::planner_failed(const std::string& why) {
    log::warn("orchestrator", "planner error: " + why);
    planner_error_ = true;
    report_.error = "PlannerError: " + why;
    current_.end = ctx_.now();
    current_.version_after = c_.version();
    current_.planner_state = pstate_;
    enter_terminal();
    current_.phi_after = phi();
    report_.edit_cycles.push_back(current_);
    // Outcomes still queued are folded by the drain cycles.
    if (!queue_.empty()) {
        cycle_begin();
        return;
    }
    release();
}

void Orchestrator::enter_terminal() {
    // No more dispatches: PENDING tasks are cancelled, running ones drain.
    for (const auto& [id, t] : c_.tasks()) {
        if (t.status != TaskStatus::Pending) continue;
        c_.transition(id, TaskStatus::Failed, Json{{"error", "cancelled by planner"}},
                      FailureReason::PlannerCancelled);
        pending_failure_.erase(id);
        report_.timings[id].end = ctx_.now();
    }
}

void Orchestrator::release() {
    held_ = false;
    dispatch_ready();
    check_end();
}

void Orchestrator::dispatch_ready() {
    if (held_ || finished_ || is_terminal(pstate_) || planner_error_) return;
    bool synthesized = false;
    for (const auto& id : ready_tasks(c_, conditions_)) {
        if (inflight_.count(id) || pending_failure_.count(id) || assignments_.count(id)) continue;
        const auto device = c_.task(id).device;
        auto avail = dispatcher_.availability(device);
        if (avail == DeviceAvailability::Unavailable) continue;
        if (avail != DeviceAvailability::Available) {
            OrchestratorEvent e;
            e.kind = EventKind::TaskFailed;
            e.task_id = id;
            e.device = device;
            e.failure_reason = FailureReason::AgentDisconnected;
            e.payload = Json{{"error", "device " + device + " is " + std::string(to_string(avail))}};
            pending_failure_.insert(id);
            synthesized = true;
            enqueue(e);
            continue;
        }
        if (held_) ++report_.checks.lock_violations;
        if (c_.version() != committed_version_) ++report_.checks.version_mismatches;
        assignments_[id] = device;
        assigned_at_dispatch_[id] = device;
        c_.transition(id, TaskStatus::Running);
        frozen_[id] = frozen_view(c_, id);
        inflight_.insert(id);
        report_.timings[id].start = ctx_.now();
        report_.timings[id].device = device;
        report_.dispatch_counts[id]++;
        OrchestratorEvent started;
        started.kind = EventKind::TaskStarted;
        started.task_id = id;
        started.device = device;
        publish(started);
        check_i1();
        TaskStar snapshot = c_.task(id);
        try {
            dispatcher_.dispatch(snapshot, [this](OrchestratorEvent e) { enqueue(std::move(e)); });
        } catch (const Error& err) {
            OrchestratorEvent e;
            e.kind = EventKind::TaskFailed;
            e.task_id = id;
            e.device = device;
            e.failure_reason = FailureReason::AgentDisconnected;
            e.payload = Json{{"error", err.what()}};
            enqueue(e);
            continue;
        }
        timeouts_[id] = ctx_.post_after(cfg_.task_timeout, [this, id, device] {
            timeouts_.erase(id);
            if (!inflight_.count(id)) return;
            dispatcher_.abandon(id);
            OrchestratorEvent e;
            e.kind = EventKind::TaskFailed;
            e.task_id = id;
            e.device = device;
            e.failure_reason = FailureReason::Timeout;
            e.payload = Json{{"error", "no outcome within " + std::to_string(cfg_.task_timeout) + " s"}};
            on_event(e);
        });
    }
    (void)synthesized;
}

void Orchestrator::check_i1() {
    for (const auto& [id, t] : c_.tasks()) {
        if (t.status != TaskStatus::Running) continue;
        auto a = assignments_.find(id);
        auto d = assigned_at_dispatch_.find(id);
        if (a == assignments_.end() || d == assigned_at_dispatch_.end() || a->second != d->second)
            ++report_.checks.i1_violations;
    }
}

void Orchestrator::check_end() {
    if (finished_ || held_ || !queue_.empty() || !inflight_.empty() || !pending_failure_.empty()) return;
    if (is_terminal(pstate_) || planner_error_ || is_quiescent(c_, conditions_)) finish();
}

bool Orchestrator::superseded(const TaskId& id, int depth) const {
    if (depth > 16) return false;
    const auto& fin = c_;
    if (!fin.has_task(id)) return false;
    const auto& name = fin.task(id).name;
    for (const auto& cyc : report_.edit_cycles) {
        bool presented = std::any_of(cyc.batch.begin(), cyc.batch.end(), [&](const auto& e) {
            return e.kind == EventKind::TaskFailed && e.task_id == id;
        });
        if (!presented) continue;
        for (const auto& added : cyc.added_tasks) {
            if (!fin.has_task(added) || fin.task(added).name != name) continue;
            auto st = fin.task(added).status;
            if (st == TaskStatus::Completed) return true;
            if (st == TaskStatus::Failed && superseded(added, depth + 1)) return true;
        }
    }
    return false;
}

RunOutcome Orchestrator::compute_outcome() const {
    if (planner_error_ || pstate_ == PlannerState::Fail) return RunOutcome::Failed;
    for (const auto& [id, t] : c_.tasks()) {
        if (t.status == TaskStatus::Completed) continue;
        if (t.status == TaskStatus::Failed && superseded(id, 0)) continue;
        return RunOutcome::Partial;
    }
    return RunOutcome::Success;
}

void Orchestrator::finish() {
    if (finished_) return;
    finished_ = true;
    for (auto& [id, timer] : timeouts_) ctx_.cancel(timer);
    timeouts_.clear();
    report_.final_constellation = c_;
    report_.finished_at = ctx_.now();
    report_.planner_final_state = pstate_;
    report_.checks.handler_failures = bus_.handler_failures();
    report_.outcome = compute_outcome();
    for (auto& cb : finished_cbs_) cb();
}

RunReport run(TaskConstellation c, Planner& planner, Dispatcher& dispatcher, sim::VirtualClock& clock,
              OrchestratorConfig cfg, const ConditionRegistry& conditions) {
    Orchestrator o(clock, planner, dispatcher, cfg, conditions);
    o.on_finished([&clock] { clock.stop(); });
    o.start(std::move(c));
    while (!o.finished() && clock.pending() > 0) {
        clock.run();
        if (clock.stopped()) break;
    }
    return o.report();
}

}  // namespace constellation
