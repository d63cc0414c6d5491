#include "maid/run.hpp"

#include <chrono>

#include <fmt/format.h>

#include "maid/error.hpp"

namespace maid {
namespace {

std::int64_t now_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::vector<Artifact> gather_inputs(const RunState& run, const StageSpec& node) {
    std::vector<Artifact> out;
    for (const auto& port : signature(node.kind).inputs) {
        const Artifact* found = nullptr;
        for (const auto& e : run.flow.edges) {
            if (e.to == node.id && e.to_port == port.name) {
                found = &run.artifacts.at(e.from);
                break;
            }
        }
        if (!found) found = &run.inputs.at(node.id + "." + std::string(port.name));
        out.push_back(*found);
    }
    return out;
}

void fail(RunState& run, const std::string& node, const std::string& reason) {
    run.status = {RunStatusKind::Failed, node, reason};
}

/// Runs stages from the cursor until a checkpoint pauses the run, a backend
/// fails, or the plan is exhausted.
void advance(RunState& run, const BackendRegistry& backends) {
    run.status = {RunStatusKind::Running, {}, {}};
    while (run.cursor < run.plan.size()) {
        const auto& id = run.plan[run.cursor];
        const auto& node = *run.flow.node(id);
        const auto inputs = gather_inputs(run, node);

        LogEntry entry{id, now_ms(), 0, node.backend};
        Payload out;
        try {
            out = backends.invoke(node.backend, node.kind, inputs, node.params);
        } catch (const std::exception& e) {
            entry.end_ms = now_ms();
            run.log.push_back(entry);
            fail(run, id, fmt::format("BackendFailure{{node: {}, cause: {}}}", id, e.what()));
            return;
        }
        entry.end_ms = now_ms();
        run.log.push_back(entry);

        const auto expected = signature(node.kind).output;
        if (modality_of(out) != expected) {
            fail(run, id, fmt::format("BackendFailure{{node: {}, cause: backend returned {} for a {} stage}}", id,
                                      to_string(modality_of(out)), to_string(expected)));
            return;
        }
        std::vector<ArtifactId> parents;
        for (const auto& a : inputs) parents.push_back(a.id);
        auto artifact = make_artifact(std::move(out), std::move(parents), std::string(to_string(node.kind)));

        if (node.checkpoint) {
            run.pending = std::move(artifact);
            run.status = {RunStatusKind::AwaitingEdit, id, {}};
            run.checkpoints_visited.push_back(id);
            return;
        }
        run.artifacts.emplace(id, std::move(artifact));
        ++run.cursor;
    }
    run.status = {RunStatusKind::Completed, {}, {}};
}

}  // namespace

std::string_view to_string(RunStatusKind k) noexcept {
    switch (k) {
        case RunStatusKind::Running: return "Running";
        case RunStatusKind::AwaitingEdit: return "AwaitingEdit";
        case RunStatusKind::Completed: return "Completed";
        case RunStatusKind::Failed: return "Failed";
    }
    return "Running";
}

std::map<ArtifactId, const Artifact*> RunState::index() const {
    std::map<ArtifactId, const Artifact*> out;
    for (const auto& [_, a] : inputs) out[a.id] = &a;
    for (const auto& [_, a] : artifacts) out[a.id] = &a;
    for (const auto& [_, a] : raw_outputs) out[a.id] = &a;
    if (pending) out[pending->id] = &*pending;
    return out;
}

std::string new_run_id() { return "run-" + ArtifactId::random().hex().substr(0, 16); }

RunState start_run(const FlowSpec& spec, std::map<std::string, Artifact> inputs, const BackendRegistry& backends,
                   std::string run_id) {
    if (const auto report = validate_flow(spec); !report.empty())
        throw Error(ErrorCode::Syntax, fmt::format("flow '{}' does not validate: {}", spec.name, report.front().detail));
    for (const auto& in : spec.inputs) {
        auto it = inputs.find(in.key());
        if (it == inputs.end()) throw Error(ErrorCode::InputModalityMismatch, fmt::format("missing input {}", in.key()));
        if (it->second.modality != in.modality)
            throw Error(ErrorCode::InputModalityMismatch, fmt::format("input {} is {}, expected {}", in.key(),
                                                                      to_string(it->second.modality), to_string(in.modality)));
    }
    for (const auto& [key, _] : inputs) {
        const bool declared = std::any_of(spec.inputs.begin(), spec.inputs.end(), [&](const auto& in) { return in.key() == key; });
        if (!declared) throw Error(ErrorCode::InputModalityMismatch, fmt::format("undeclared input {}", key));
    }

    RunState run;
    run.run_id = run_id.empty() ? new_run_id() : std::move(run_id);
    run.flow = spec;
    run.inputs = std::move(inputs);
    run.plan = plan_order(spec);
    advance(run, backends);
    return run;
}

RunState submit_checkpoint_edit(RunState run, const std::string& node, const Artifact& edited, const BackendRegistry& backends) {
    if (run.status.kind != RunStatusKind::AwaitingEdit || run.status.node != node || !run.pending)
        throw Error(ErrorCode::WrongState, fmt::format("run {} is {} and not awaiting an edit of '{}'", run.run_id,
                                                       to_string(run.status.kind), node));
    if (edited.modality != run.pending->modality)
        throw Error(ErrorCode::ModalityMismatch, fmt::format("checkpoint '{}' takes {}, got {}", node,
                                                             to_string(run.pending->modality), to_string(edited.modality)));
    auto committed = make_artifact(edited.payload, {run.pending->id}, run.pending->stage_kind);
    run.raw_outputs.emplace(node, std::move(*run.pending));
    run.pending.reset();
    run.artifacts.emplace(node, std::move(committed));
    ++run.cursor;
    advance(run, backends);
    return run;
}

RunManager::RunManager(std::shared_ptr<const BackendRegistry> backends) : backends_(std::move(backends)) {}

RunState RunManager::start_run(const FlowSpec& spec, std::map<std::string, Artifact> inputs) {
    auto s = std::make_shared<Slot>();
    const auto id = new_run_id();
    std::unique_lock run_lock(s->mutex);
    s->state = maid::start_run(spec, std::move(inputs), *backends_, id);
    {
        std::unique_lock lock(mutex_);
        runs_.emplace(id, s);
    }
    return s->state;
}

RunState RunManager::submit_checkpoint_edit(const std::string& run_id, const std::string& node, const Artifact& edited) {
    auto s = slot(run_id);
    std::unique_lock lock(s->mutex);
    s->state = maid::submit_checkpoint_edit(s->state, node, edited, *backends_);
    return s->state;
}

RunState RunManager::get_run(const std::string& run_id) const {
    auto s = slot(run_id);
    std::unique_lock lock(s->mutex);
    return s->state;
}

std::vector<std::string> RunManager::run_ids() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> ids;
    for (const auto& [id, _] : runs_) ids.push_back(id);
    return ids;
}

std::shared_ptr<RunManager::Slot> RunManager::slot(const std::string& run_id) const {
    std::shared_lock lock(mutex_);
    auto it = runs_.find(run_id);
    if (it == runs_.end()) throw Error(ErrorCode::NotFound, fmt::format("no run '{}'", run_id));
    return it->second;
}

}  // namespace maid
