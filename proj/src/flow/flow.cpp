#include "maid/flow.hpp"

#include <map>
#include <queue>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "maid/error.hpp"
#include "maid/wire.hpp"

namespace maid {
namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw Error(ErrorCode::Syntax, fmt::format("unknown field '{}' in {}", key, where));
    }
}

std::string require_string(const json& obj, const char* key, std::string_view where) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string() || it->get_ref<const std::string&>().empty())
        throw Error(ErrorCode::Syntax, fmt::format("{}.{} must be a non-empty string", where, key));
    return it->get<std::string>();
}

const json& optional_array(const json& obj, const char* key) {
    static const json empty = json::array();
    auto it = obj.find(key);
    if (it == obj.end()) return empty;
    if (!it->is_array()) throw Error(ErrorCode::Syntax, fmt::format("'{}' must be an array", key));
    return *it;
}

}  // namespace

const StageSpec* FlowSpec::node(std::string_view id) const {
    for (const auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

FlowSpec parse_flow_spec(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Syntax, e.what());
    }
    if (!doc.is_object()) throw Error(ErrorCode::Syntax, "flow document must be an object");
    reject_unknown(doc, {"name", "nodes", "edges", "inputs", "outputs"}, "flow");

    FlowSpec spec;
    spec.name = require_string(doc, "name", "flow");
    const auto& nodes = optional_array(doc, "nodes");
    if (nodes.empty()) throw Error(ErrorCode::Syntax, "flow has no nodes");

    std::set<std::string> ids;
    for (const auto& n : nodes) {
        if (!n.is_object()) throw Error(ErrorCode::Syntax, "node must be an object");
        reject_unknown(n, {"id", "kind", "backend", "params", "checkpoint"}, "node");
        StageSpec s;
        s.id = require_string(n, "id", "node");
        const auto kind_name = require_string(n, "kind", "node");
        const auto kind = stage_kind_from_string(kind_name);
        if (!kind) throw Error(ErrorCode::UnknownStageKind, fmt::format("node '{}' has kind '{}'", s.id, kind_name));
        s.kind = *kind;
        if (n.contains("backend")) s.backend = require_string(n, "backend", "node");
        if (n.contains("params")) s.params = wire::decode_params(n["params"]);
        if (n.contains("checkpoint")) {
            if (!n["checkpoint"].is_boolean()) throw Error(ErrorCode::Syntax, "node.checkpoint must be a boolean");
            s.checkpoint = n["checkpoint"].get<bool>();
        }
        if (!ids.insert(s.id).second) throw Error(ErrorCode::DuplicateNodeId, s.id);
        spec.nodes.push_back(std::move(s));
    }

    for (const auto& e : optional_array(doc, "edges")) {
        if (!e.is_array() || e.size() != 4 || !std::all_of(e.begin(), e.end(), [](const json& v) { return v.is_string(); }))
            throw Error(ErrorCode::Syntax, "edge must be [from, fromPort, to, toPort]");
        spec.edges.push_back({e[0].get<std::string>(), e[1].get<std::string>(), e[2].get<std::string>(), e[3].get<std::string>()});
    }

    for (const auto& in : optional_array(doc, "inputs")) {
        if (!in.is_object()) throw Error(ErrorCode::Syntax, "input must be an object");
        reject_unknown(in, {"node", "port", "modality"}, "input");
        FlowInput fi;
        fi.node = require_string(in, "node", "input");
        fi.port = require_string(in, "port", "input");
        const auto m = modality_from_string(require_string(in, "modality", "input"));
        if (!m) throw Error(ErrorCode::Syntax, "input.modality must be text, image, audio or video");
        fi.modality = *m;
        spec.inputs.push_back(std::move(fi));
    }

    for (const auto& o : optional_array(doc, "outputs")) {
        if (!o.is_string()) throw Error(ErrorCode::Syntax, "outputs must be node ids");
        spec.outputs.push_back(o.get<std::string>());
    }
    return spec;
}

std::string to_document(const FlowSpec& spec) {
    json doc;
    doc["name"] = spec.name;
    doc["nodes"] = json::array();
    for (const auto& n : spec.nodes) {
        doc["nodes"].push_back({{"id", n.id},
                                {"kind", to_string(n.kind)},
                                {"backend", n.backend},
                                {"params", wire::encode_params(n.params)},
                                {"checkpoint", n.checkpoint}});
    }
    doc["edges"] = json::array();
    for (const auto& e : spec.edges) doc["edges"].push_back({e.from, e.from_port, e.to, e.to_port});
    doc["inputs"] = json::array();
    for (const auto& in : spec.inputs)
        doc["inputs"].push_back({{"node", in.node}, {"port", in.port}, {"modality", to_string(in.modality)}});
    doc["outputs"] = spec.outputs;
    return doc.dump(2);
}

std::string_view to_string(IssueKind k) noexcept {
    switch (k) {
        case IssueKind::CycleDetected: return "CycleDetected";
        case IssueKind::ModalityMismatch: return "ModalityMismatch";
        case IssueKind::UnfedPort: return "UnfedPort";
        case IssueKind::UnreachableOutput: return "UnreachableOutput";
        case IssueKind::DanglingReference: return "DanglingReference";
        case IssueKind::MultiplyFedPort: return "MultiplyFedPort";
        case IssueKind::IllegalCheckpoint: return "IllegalCheckpoint";
    }
    return "Unknown";
}

ValidationReport validate_flow(const FlowSpec& spec) {
    ValidationReport report;
    std::map<std::string, int> feeds;  // "node.port" -> number of feeders

    for (const auto& n : spec.nodes) {
        for (const auto& p : signature(n.kind).inputs) feeds[n.id + "." + std::string(p.name)] = 0;
        if (n.checkpoint && !is_editable(signature(n.kind).output))
            report.push_back({IssueKind::IllegalCheckpoint,
                              fmt::format("node '{}' outputs {}, which cannot be edited", n.id, to_string(signature(n.kind).output)),
                              std::nullopt});
    }

    std::map<std::string, std::vector<std::string>> successors;
    for (std::size_t i = 0; i < spec.edges.size(); ++i) {
        const auto& e = spec.edges[i];
        const auto* from = spec.node(e.from);
        const auto* to = spec.node(e.to);
        if (!from || !to || e.from_port != kOutputPort || !signature(to->kind).input_modality(e.to_port)) {
            report.push_back({IssueKind::DanglingReference,
                              fmt::format("edge {}.{} -> {}.{} names a missing node or port", e.from, e.from_port, e.to, e.to_port),
                              i});
            continue;
        }
        const auto produced = signature(from->kind).output;
        const auto expected = *signature(to->kind).input_modality(e.to_port);
        if (produced != expected)
            report.push_back({IssueKind::ModalityMismatch,
                              fmt::format("edge {} -> {}.{} carries {} into a {} port", e.from, e.to, e.to_port,
                                          to_string(produced), to_string(expected)),
                              i});
        ++feeds[e.to + "." + e.to_port];
        successors[e.from].push_back(e.to);
    }

    std::set<std::string> sources;
    for (const auto& in : spec.inputs) {
        const auto* n = spec.node(in.node);
        const auto expected = n ? signature(n->kind).input_modality(in.port) : std::nullopt;
        if (!expected) {
            report.push_back({IssueKind::DanglingReference, fmt::format("input {} names a missing node or port", in.key()), std::nullopt});
            continue;
        }
        if (*expected != in.modality)
            report.push_back({IssueKind::ModalityMismatch,
                              fmt::format("input {} is declared {} but the port takes {}", in.key(), to_string(in.modality),
                                          to_string(*expected)),
                              std::nullopt});
        ++feeds[in.key()];
        sources.insert(in.node);
    }

    for (const auto& [port, count] : feeds) {
        if (count == 0) report.push_back({IssueKind::UnfedPort, fmt::format("port {} has no feeder", port), std::nullopt});
        if (count > 1)
            report.push_back({IssueKind::MultiplyFedPort, fmt::format("port {} has {} feeders", port, count), std::nullopt});
    }

    // Kahn's algorithm over the well-formed edges.
    std::map<std::string, int> indegree;
    for (const auto& n : spec.nodes) indegree[n.id] = 0;
    for (const auto& [from, tos] : successors)
        for (const auto& to : tos) ++indegree[to];
    std::queue<std::string> ready;
    for (const auto& [id, d] : indegree)
        if (d == 0) ready.push(id);
    std::size_t visited = 0;
    while (!ready.empty()) {
        const auto id = ready.front();
        ready.pop();
        ++visited;
        for (const auto& to : successors[id])
            if (--indegree[to] == 0) ready.push(to);
    }
    if (visited != spec.nodes.size()) {
        std::vector<std::string> stuck;
        for (const auto& [id, d] : indegree)
            if (d > 0) stuck.push_back(id);
        report.push_back({IssueKind::CycleDetected, fmt::format("cycle through {}", fmt::join(stuck, ", ")), std::nullopt});
    }

    std::set<std::string> reached;
    std::queue<std::string> frontier;
    for (const auto& s : sources) {
        reached.insert(s);
        frontier.push(s);
    }
    while (!frontier.empty()) {
        const auto id = frontier.front();
        frontier.pop();
        for (const auto& to : successors[id])
            if (reached.insert(to).second) frontier.push(to);
    }
    for (const auto& out : spec.outputs) {
        if (!spec.node(out))
            report.push_back({IssueKind::DanglingReference, fmt::format("output '{}' is not a node", out), std::nullopt});
        else if (!reached.contains(out))
            report.push_back({IssueKind::UnreachableOutput, fmt::format("output '{}' is not reachable from any input", out), std::nullopt});
    }
    return report;
}

std::vector<std::string> plan_order(const FlowSpec& spec) {
    std::map<std::string, int> indegree;
    std::map<std::string, std::vector<std::string>> successors;
    for (const auto& n : spec.nodes) indegree[n.id] = 0;
    for (const auto& e : spec.edges) {
        ++indegree[e.to];
        successors[e.from].push_back(e.to);
    }
    std::set<std::string> ready;
    for (const auto& [id, d] : indegree)
        if (d == 0) ready.insert(id);
    std::vector<std::string> order;
    order.reserve(spec.nodes.size());
    while (!ready.empty()) {
        auto id = *ready.begin();
        ready.erase(ready.begin());
        for (const auto& to : successors[id])
            if (--indegree[to] == 0) ready.insert(to);
        order.push_back(std::move(id));
    }
    return order;
}

}  // namespace maid
