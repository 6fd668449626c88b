#include "constellation/core/serialize.hpp"

#include <set>

namespace constellation {

namespace {

[[noreturn]] void parse_fail(const std::string& what) {
    throw Error(ErrorCode::ParseError, what);
}

const Json& field(const Json& j, const char* key) {
    if (!j.is_object()) parse_fail(std::string("expected object holding '") + key + "'");
    auto it = j.find(key);
    if (it == j.end()) parse_fail(std::string("missing field '") + key + "'");
    return *it;
}

std::string str(const Json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_string()) parse_fail(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

std::string str_or(const Json& j, const char* key, std::string dflt) {
    if (!j.is_object() || !j.contains(key)) return dflt;
    return str(j, key);
}

std::vector<std::string> str_list(const Json& v, const char* key) {
    if (!v.is_array()) parse_fail(std::string("field '") + key + "' must be an array");
    std::vector<std::string> out;
    for (const auto& x : v) {
        if (!x.is_string()) parse_fail(std::string("field '") + key + "' must hold strings");
        out.push_back(x.get<std::string>());
    }
    return out;
}

Json dep_type_fields(const DependencyType& t) {
    Json j = Json::object();
    j["dep_type"] = to_string(t.kind);
    if (t.kind == DependencyType::Kind::Conditional) j["condition_id"] = t.condition_id;
    return j;
}

}  // namespace

Json to_json(const TaskStar& t, const std::vector<EdgeId>& dependencies) {
    Json j = Json::object();
    j["id"] = t.id;
    j["name"] = t.name;
    j["description"] = t.description;
    j["tips"] = t.tips;
    j["device"] = t.device;
    j["status"] = to_string(t.status);
    j["dependencies"] = dependencies;
    if (t.result) j["result"] = *t.result;
    if (t.failure_reason) j["failure_reason"] = to_string(*t.failure_reason);
    return j;
}

Json to_json(const TaskStarLine& e) {
    Json j = dep_type_fields(e.dep_type);
    j["id"] = e.id;
    j["from_task"] = e.from_task;
    j["to_task"] = e.to_task;
    j["description"] = e.description;
    return j;
}

Json to_json(const TaskSpec& s) {
    return Json{{"id", s.id}, {"name", s.name}, {"description", s.description},
                {"tips", s.tips}, {"device", s.device}};
}

Json to_json(const TaskPatch& p) {
    Json j = Json::object();
    if (p.name) j["name"] = *p.name;
    if (p.description) j["description"] = *p.description;
    if (p.device) j["device"] = *p.device;
    if (p.tips) j["tips"] = *p.tips;
    if (p.status) j["status"] = to_string(*p.status);
    if (p.result) j["result"] = *p.result;
    return j;
}

Json to_json(const DependencyPatch& p) {
    Json j = Json::object();
    if (p.dep_type) j.update(dep_type_fields(*p.dep_type));
    if (p.description) j["description"] = *p.description;
    return j;
}

Json to_json(const EditOp& eop) {
    Json j = std::visit(
        [](const auto& o) -> Json {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, op::AddTask>) return {{"task", to_json(o.spec)}};
            else if constexpr (std::is_same_v<T, op::RemoveTask>) return {{"id", o.id}};
            else if constexpr (std::is_same_v<T, op::UpdateTask>) return {{"id", o.id}, {"patch", to_json(o.patch)}};
            else if constexpr (std::is_same_v<T, op::AddDependency>) return {{"dependency", to_json(o.spec)}};
            else if constexpr (std::is_same_v<T, op::RemoveDependency>) return {{"id", o.id}};
            else if constexpr (std::is_same_v<T, op::UpdateDependency>)
                return {{"id", o.id}, {"patch", to_json(o.patch)}};
            else {
                Json tasks = Json::array(), deps = Json::array();
                for (const auto& t : o.config.tasks) tasks.push_back(to_json(t));
                for (const auto& e : o.config.dependencies) deps.push_back(to_json(e));
                return {{"clear", o.clear}, {"config", {{"tasks", tasks}, {"dependencies", deps}}}};
            }
        },
        eop);
    j["op"] = op_name(eop);
    return j;
}

Json to_json(const EditDelta& d) {
    Json ops = Json::array();
    for (const auto& o : d.ops) ops.push_back(to_json(o));
    return Json{{"ops", ops}, {"provenance", d.provenance}};
}

Json to_json(const DeltaSummary& s) {
    return Json{{"added_tasks", s.added_tasks},
                {"removed_tasks", s.removed_tasks},
                {"modified_tasks", s.modified_tasks},
                {"added_dependencies", s.added_dependencies},
                {"removed_dependencies", s.removed_dependencies},
                {"modified_dependencies", s.modified_dependencies}};
}

Json serialize(const TaskConstellation& c) {
    Json tasks = Json::array();
    for (const auto& [id, t] : c.tasks()) tasks.push_back(to_json(t, c.incoming(id)));
    Json deps = Json::array();
    for (const auto& [id, e] : c.edges()) deps.push_back(to_json(e));
    return Json{{"request", c.request()}, {"version", c.version()}, {"tasks", tasks}, {"dependencies", deps}};
}

std::string serialize_text(const TaskConstellation& c) {
    return serialize(c).dump(2) + "\n";
}

DependencyType dependency_type_from_json(const Json& j) {
    auto kind_s = str(j, "dep_type");
    auto kind = parse_dependency_kind(kind_s);
    if (!kind) parse_fail("unknown dep_type '" + kind_s + "'");
    if (*kind == DependencyType::Kind::Conditional) {
        auto cid = str(j, "condition_id");
        if (cid.empty()) parse_fail("CONDITIONAL dependency needs a condition_id");
        return DependencyType::conditional(cid);
    }
    return DependencyType{*kind, {}};
}

TaskSpec task_spec_from_json(const Json& j) {
    TaskSpec s;
    s.id = str(j, "id");
    s.name = str_or(j, "name", s.id);
    s.description = str_or(j, "description", "");
    if (j.contains("tips")) s.tips = str_list(j["tips"], "tips");
    s.device = str_or(j, "device", "");
    return s;
}

TaskStarLine edge_from_json(const Json& j) {
    TaskStarLine e;
    e.id = str(j, "id");
    e.from_task = str(j, "from_task");
    e.to_task = str(j, "to_task");
    e.dep_type = j.contains("dep_type") ? dependency_type_from_json(j) : DependencyType::unconditional();
    e.description = str_or(j, "description", "");
    return e;
}

TaskPatch task_patch_from_json(const Json& j) {
    if (!j.is_object()) parse_fail("patch must be an object");
    static const std::set<std::string> known{"name", "description", "device", "tips", "status", "result"};
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) parse_fail("unknown patch field '" + k + "'");
    TaskPatch p;
    if (j.contains("name")) p.name = str(j, "name");
    if (j.contains("description")) p.description = str(j, "description");
    if (j.contains("device")) p.device = str(j, "device");
    if (j.contains("tips")) p.tips = str_list(j["tips"], "tips");
    if (j.contains("status")) {
        auto s = parse_task_status(str(j, "status"));
        if (!s) parse_fail("unknown status in patch");
        p.status = *s;
    }
    if (j.contains("result")) p.result = j["result"];
    return p;
}

DependencyPatch dependency_patch_from_json(const Json& j) {
    if (!j.is_object()) parse_fail("patch must be an object");
    DependencyPatch p;
    if (j.contains("dep_type")) p.dep_type = dependency_type_from_json(j);
    if (j.contains("description")) p.description = str(j, "description");
    return p;
}

EditOp edit_op_from_json(const Json& j) {
    auto name = str(j, "op");
    if (name == "add_task") return op::AddTask{task_spec_from_json(field(j, "task"))};
    if (name == "remove_task") return op::RemoveTask{str(j, "id")};
    if (name == "update_task") return op::UpdateTask{str(j, "id"), task_patch_from_json(field(j, "patch"))};
    if (name == "add_dependency") return op::AddDependency{edge_from_json(field(j, "dependency"))};
    if (name == "remove_dependency") return op::RemoveDependency{str(j, "id")};
    if (name == "update_dependency")
        return op::UpdateDependency{str(j, "id"), dependency_patch_from_json(field(j, "patch"))};
    if (name == "build_constellation") {
        op::BuildConstellation b;
        const auto& cfg = field(j, "config");
        if (cfg.contains("tasks"))
            for (const auto& t : cfg["tasks"]) b.config.tasks.push_back(task_spec_from_json(t));
        if (cfg.contains("dependencies"))
            for (const auto& e : cfg["dependencies"]) b.config.dependencies.push_back(edge_from_json(e));
        if (j.contains("clear")) {
            if (!j["clear"].is_boolean()) parse_fail("'clear' must be a boolean");
            b.clear = j["clear"].get<bool>();
        }
        return b;
    }
    parse_fail("unknown op '" + name + "'");
}

EditDelta edit_delta_from_json(const Json& j) {
    EditDelta d;
    const Json* ops = &j;
    if (j.is_object()) {
        ops = &field(j, "ops");
        d.provenance = str_or(j, "provenance", "");
    }
    if (!ops->is_array()) parse_fail("delta ops must be an array");
    for (const auto& o : *ops) d.ops.push_back(edit_op_from_json(o));
    return d;
}

TaskConstellation deserialize_unvalidated(const Json& doc) {
    if (!doc.is_object()) parse_fail("constellation document must be an object");
    TaskConstellation c(str_or(doc, "request", ""));
    if (doc.contains("version")) {
        const auto& v = doc["version"];
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            parse_fail("version must be a non-negative integer");
        c.set_version(v.get<std::uint64_t>());
    }
    std::vector<Violation> dups;
    const auto& tasks = field(doc, "tasks");
    if (!tasks.is_array()) parse_fail("'tasks' must be an array");
    for (const auto& tj : tasks) {
        TaskStar t = TaskStar::from_spec(task_spec_from_json(tj));
        if (tj.contains("status")) {
            auto s = parse_task_status(str(tj, "status"));
            if (!s) parse_fail("unknown status for task '" + t.id + "'");
            t.status = *s;
        }
        if (tj.contains("result")) t.result = tj["result"];
        if (tj.contains("failure_reason")) {
            auto r = parse_failure_reason(str(tj, "failure_reason"));
            if (!r) parse_fail("unknown failure_reason for task '" + t.id + "'");
            t.failure_reason = *r;
        }
        if (c.has_task(t.id)) {
            dups.push_back({ErrorCode::DuplicateId, "task", {t.id}});
            continue;
        }
        c.insert_task_unchecked(std::move(t));
    }
    const Json empty = Json::array();
    const auto& deps = doc.contains("dependencies") ? doc["dependencies"] : empty;
    if (!deps.is_array()) parse_fail("'dependencies' must be an array");
    for (const auto& ej : deps) {
        auto e = edge_from_json(ej);
        if (c.has_edge(e.id)) {
            dups.push_back({ErrorCode::DuplicateId, "dependency", {e.id}});
            continue;
        }
        c.insert_edge_unchecked(std::move(e));
    }
    if (!dups.empty()) throw Error(ErrorCode::ValidationFailed, "duplicate ids", std::move(dups));
    return c;
}

TaskConstellation deserialize(const Json& doc) {
    auto c = deserialize_unvalidated(doc);
    auto vs = validate(c);
    if (!vs.empty()) throw Error(ErrorCode::ValidationFailed, "constellation is invalid", std::move(vs));
    return c;
}

TaskConstellation deserialize_text(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        parse_fail(e.what());
    }
    return deserialize(doc);
}

}  // namespace constellation
