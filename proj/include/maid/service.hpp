#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "maid/backend.hpp"
#include "maid/error.hpp"
#include "maid/experiment.hpp"
#include "maid/flow.hpp"
#include "maid/run.hpp"
#include "maid/uri.hpp"

namespace maid {

struct ServiceConfig {
    std::filesystem::path data_dir;  // empty: in-memory registry
    std::string listen = "127.0.0.1:8080";
    std::string default_user = "anonymous";
    std::optional<std::filesystem::path> backend_table;
    std::string device = "maid-service";
    bool retain_payloads = true;
};

/// Reads MAID_DATA_DIR, MAID_LISTEN, MAID_USER and MAID_BACKENDS over `base`.
ServiceConfig config_from_env(ServiceConfig base = {});

/// API error codes and the HTTP status each maps to:
///   bad_request 400, not_found 404, conflict 409, backend_failure 502,
///   internal 500. A flow that fails validation is answered with 422 and
///   its report.
std::string_view api_error_code(ErrorCode code) noexcept;
int http_status(std::string_view api_code) noexcept;

struct Response {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;

    nlohmann::json json() const { return nlohmann::json::parse(body); }
};

std::string percent_decode(std::string_view s);
std::string percent_encode(std::string_view s);

nlohmann::json record_json(const UriRecord& record);
nlohmann::json report_json(const ValidationReport& report);

/// Routes requests onto the flow engine, the provenance registry and the
/// experiment harness. `handle` is the whole API and needs no socket;
/// `serve` binds it to HTTP.
class Service {
public:
    explicit Service(ServiceConfig config);
    Service(ServiceConfig config, std::shared_ptr<BackendRegistry> backends, std::shared_ptr<ProvenanceRegistry> provenance);

    Response handle(std::string_view method, std::string_view target, std::string_view body,
                    std::string_view remote_addr = "127.0.0.1");

    /// Blocks serving config().listen until stop() is called. Port 0 picks
    /// a free port, reported by bound_port().
    void serve();
    /// Port being served, 0 when not listening.
    int bound_port() const;
    void stop();

    const ServiceConfig& config() const noexcept { return config_; }
    ProvenanceRegistry& provenance() noexcept { return *provenance_; }
    const RunManager& runs() const noexcept { return runs_; }

private:
    Response post_flow(std::string_view body);
    Response get_flow(const std::string& id) const;
    Response post_run(std::string_view body, std::string_view remote_addr);
    Response get_run(const std::string& id) const;
    Response post_checkpoint(const std::string& id, std::string_view body, std::string_view remote_addr);
    Response post_register(std::string_view body, std::string_view remote_addr);
    Response get_record(std::string_view encoded_uri) const;
    Response post_search(std::string_view body) const;
    Response get_experiment(std::string_view name);

    nlohmann::json run_view(const RunState& run) const;
    /// Registers every output of a completed run once.
    void register_outputs(const RunState& run, std::string_view remote_addr);

    ServiceConfig config_;
    std::shared_ptr<BackendRegistry> backends_;
    std::shared_ptr<ProvenanceRegistry> provenance_;
    RunManager runs_;

    mutable std::shared_mutex flows_mutex_;
    std::map<std::string, FlowSpec> flows_;
    std::size_t next_flow_ = 0;

    struct RunMeta {
        std::string user;
        std::map<std::string, std::string> output_uris;
        bool registered = false;
    };
    mutable std::mutex meta_mutex_;
    std::map<std::string, RunMeta> run_meta_;

    std::mutex experiments_mutex_;
    std::map<std::string, std::string> experiment_csv_;

    mutable std::mutex server_mutex_;
    void* server_ = nullptr;  // httplib::Server while serving
    int bound_port_ = 0;
};

}  // namespace maid
