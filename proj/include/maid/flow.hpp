#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "maid/modality.hpp"
#include "maid/stage.hpp"

namespace maid {

struct StageSpec {
    std::string id;
    StageKind kind = StageKind::TextGen;
    std::string backend = "mock";
    Params params;
    bool checkpoint = false;
};

struct Edge {
    std::string from;
    std::string from_port;
    std::string to;
    std::string to_port;
};

/// An externally supplied artifact bound to one consumer port.
struct FlowInput {
    std::string node;
    std::string port;
    Modality modality = Modality::Text;

    /// "node.port", the key used when supplying run inputs.
    std::string key() const { return node + "." + port; }
};

struct FlowSpec {
    std::string name;
    std::vector<StageSpec> nodes;
    std::vector<Edge> edges;
    std::vector<FlowInput> inputs;
    std::vector<std::string> outputs;

    const StageSpec* node(std::string_view id) const;
};

/// Flow documents are JSON objects:
///   {"name": ..., "nodes": [{"id", "kind", "backend"?, "params"?, "checkpoint"?}],
///    "edges": [[from, fromPort, to, toPort]], "inputs": [{"node", "port", "modality"}],
///    "outputs": [node ids]}
/// Unknown fields are rejected. Throws Syntax, UnknownStageKind or DuplicateNodeId.
FlowSpec parse_flow_spec(std::string_view text);
std::string to_document(const FlowSpec& spec);

enum class IssueKind {
    CycleDetected,
    ModalityMismatch,
    UnfedPort,
    UnreachableOutput,
    DanglingReference,
    MultiplyFedPort,
    IllegalCheckpoint,
};

std::string_view to_string(IssueKind k) noexcept;

struct Issue {
    IssueKind kind;
    std::string detail;
    std::optional<std::size_t> edge;  // index into FlowSpec::edges, when an edge is at fault
};

using ValidationReport = std::vector<Issue>;

/// Empty iff the flow is acyclic, every edge and external input is
/// modality-consistent, every consumer port is fed exactly once and every
/// output is reachable from the external inputs.
ValidationReport validate_flow(const FlowSpec& spec);

/// Topological order, ascending node id among ready nodes. Requires an
/// acyclic flow.
std::vector<std::string> plan_order(const FlowSpec& spec);

}  // namespace maid
