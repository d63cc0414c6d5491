#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "maid/backend.hpp"
#include "maid/flow.hpp"

namespace maid {

enum class RunStatusKind { Running, AwaitingEdit, Completed, Failed };

std::string_view to_string(RunStatusKind k) noexcept;

struct RunStatus {
    RunStatusKind kind = RunStatusKind::Running;
    std::string node;    // AwaitingEdit: the paused node; Failed: the failing node, if any
    std::string reason;  // Failed only
};

struct LogEntry {
    std::string node;
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    std::string backend;
};

/// Live state of one flow execution. `artifacts` holds committed node
/// outputs; a checkpoint node's model output sits in `pending` until a human
/// edit commits a child of it, after which it moves to `raw_outputs`.
struct RunState {
    std::string run_id;
    FlowSpec flow;
    RunStatus status;
    std::map<std::string, Artifact> inputs;  // keyed "node.port"
    std::map<std::string, Artifact> artifacts;
    std::map<std::string, Artifact> raw_outputs;
    std::optional<Artifact> pending;
    std::vector<LogEntry> log;
    std::vector<std::string> plan;
    std::size_t cursor = 0;  // next index into plan
    std::vector<std::string> checkpoints_visited;

    /// Every artifact the run knows about, by id.
    std::map<ArtifactId, const Artifact*> index() const;
};

/// Executes in plan order up to the first checkpoint or to completion.
/// Throws InputModalityMismatch when `inputs` does not cover the declared
/// external ports with matching modalities, Syntax when the flow does not
/// validate. Backend errors become status Failed.
RunState start_run(const FlowSpec& spec, std::map<std::string, Artifact> inputs, const BackendRegistry& backends,
                   std::string run_id = {});

/// Commits a human edit for the paused node and resumes. The committed
/// artifact is a fresh child of the pending raw output. Throws WrongState or
/// ModalityMismatch.
RunState submit_checkpoint_edit(RunState run, const std::string& node, const Artifact& edited, const BackendRegistry& backends);

/// Owns concurrently executing runs. Each run is mutated under its own
/// lock; reads return copies taken under that lock.
class RunManager {
public:
    explicit RunManager(std::shared_ptr<const BackendRegistry> backends);

    RunState start_run(const FlowSpec& spec, std::map<std::string, Artifact> inputs);
    RunState submit_checkpoint_edit(const std::string& run_id, const std::string& node, const Artifact& edited);
    /// Throws NotFound.
    RunState get_run(const std::string& run_id) const;
    std::vector<std::string> run_ids() const;

private:
    struct Slot {
        mutable std::mutex mutex;
        RunState state;
    };
    std::shared_ptr<Slot> slot(const std::string& run_id) const;

    std::shared_ptr<const BackendRegistry> backends_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, std::shared_ptr<Slot>> runs_;
};

std::string new_run_id();

}  // namespace maid
