#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "maid/char_lm.hpp"
#include "maid/modality.hpp"
#include "maid/stage.hpp"

namespace maid {

/// A stage implementation. `inputs` arrive in the kind's signature port
/// order; the returned payload must have the kind's output modality.
using StageFn = std::function<Payload(StageKind, std::span<const Artifact>, const Params&)>;

struct RemoteEndpoint {
    std::string url;  // http://host:port/path
    std::chrono::milliseconds timeout{30000};
};

/// One blocking request/response against a remote model service.
/// Throws Transport, RemoteError or BadResponse.
Artifact remote_invoke(StageKind kind, std::span<const Artifact> inputs, const Params& params, const RemoteEndpoint& endpoint);

/// The order-2 model trained on the bundled corpus; shared by the mocks.
const CharLm& bundled_lm();

/// Payload produced by the deterministic mock for `kind`.
Payload run_mock(StageKind kind, std::span<const Artifact> inputs, const Params& params);

/// Backend name -> stage kind -> implementation. "mock" covers every kind;
/// "remote:{id}" names are bound through an endpoint table.
class BackendRegistry {
public:
    static constexpr std::string_view kMock = "mock";
    static constexpr std::string_view kRemotePrefix = "remote:";

    static BackendRegistry with_mocks();

    void register_stage(std::string name, StageKind kind, StageFn fn);
    /// Binds "remote:{id}" for every stage kind.
    void register_remote(const std::string& id, RemoteEndpoint endpoint);

    bool has(std::string_view name, StageKind kind) const;
    /// Throws NotFound for unbound names; implementation errors propagate.
    Payload invoke(std::string_view name, StageKind kind, std::span<const Artifact> inputs, const Params& params) const;

private:
    std::map<std::string, std::map<StageKind, StageFn>, std::less<>> table_;
};

/// Endpoint table file: a JSON object {"id": "http://host:port/path", ...}.
std::map<std::string, RemoteEndpoint> load_endpoint_table(const std::filesystem::path& path);

}  // namespace maid
