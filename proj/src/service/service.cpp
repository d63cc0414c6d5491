#include "maid/service.hpp"

#include <cctype>
#include <cstdlib>

#include <fmt/format.h>
#include <httplib.h>

#include "maid/wire.hpp"

namespace maid {
namespace {

using json = nlohmann::json;

Response json_response(int status, const json& body) { return {status, "application/json", body.dump()}; }

Response api_error(std::string_view code, std::string_view message) {
    return json_response(http_status(code), json{{"error", {{"code", code}, {"message", message}}}});
}

json parse_body(std::string_view body) {
    try {
        return json::parse(body);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Syntax, fmt::format("request body: {}", e.what()));
    }
}

json status_json(const RunStatus& s) {
    json j{{"kind", to_string(s.kind)}};
    if (!s.node.empty()) j["node"] = s.node;
    if (!s.reason.empty()) j["reason"] = s.reason;
    return j;
}

std::optional<std::string> opt_string(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    auto v = j.at(key).get<std::string>();
    if (v.empty()) return std::nullopt;
    return v;
}

std::pair<std::string, std::uint16_t> split_listen(std::string_view listen) {
    const auto colon = listen.rfind(':');
    if (colon == std::string_view::npos) throw Error(ErrorCode::Syntax, fmt::format("listen address '{}' lacks a port", listen));
    const int port = std::atoi(std::string(listen.substr(colon + 1)).c_str());
    if (port < 0 || port > 65535 || (port == 0 && listen.substr(colon + 1) != "0")) throw Error(ErrorCode::Syntax, fmt::format("bad port in '{}'", listen));
    return {std::string(listen.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

}  // namespace

ServiceConfig config_from_env(ServiceConfig base) {
    if (const char* v = std::getenv("MAID_DATA_DIR"); v && *v) base.data_dir = v;
    if (const char* v = std::getenv("MAID_LISTEN"); v && *v) base.listen = v;
    if (const char* v = std::getenv("MAID_USER"); v && *v) base.default_user = v;
    if (const char* v = std::getenv("MAID_BACKENDS"); v && *v) base.backend_table = v;
    return base;
}

std::string_view api_error_code(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NotFound: return "not_found";
        case ErrorCode::WrongState: return "conflict";
        case ErrorCode::Transport:
        case ErrorCode::RemoteError:
        case ErrorCode::BadResponse:
        case ErrorCode::BackendFailure: return "backend_failure";
        case ErrorCode::Io:
        case ErrorCode::PersistFailure:
        case ErrorCode::Corrupt:
        case ErrorCode::StoreFull:
        case ErrorCode::VersionMismatch: return "internal";
        default: return "bad_request";
    }
}

int http_status(std::string_view api_code) noexcept {
    if (api_code == "bad_request") return 400;
    if (api_code == "not_found") return 404;
    if (api_code == "conflict") return 409;
    if (api_code == "backend_failure") return 502;
    return 500;
}

std::string percent_decode(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
            std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
            out.push_back(static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16)));
            i += 2;
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

std::string percent_encode(std::string_view s) {
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~')
            out.push_back(static_cast<char>(c));
        else
            out += fmt::format("%{:02X}", c);
    }
    return out;
}

json record_json(const UriRecord& r) {
    // Same field order as the registry file.
    return json::parse(to_record_line(r));
}

json report_json(const ValidationReport& report) {
    json out = json::array();
    for (const auto& issue : report) {
        json j{{"kind", to_string(issue.kind)}, {"detail", issue.detail}};
        if (issue.edge) j["edge"] = *issue.edge;
        out.push_back(std::move(j));
    }
    return out;
}

Service::Service(ServiceConfig config)
    : Service(config, std::make_shared<BackendRegistry>(BackendRegistry::with_mocks()),
              config.data_dir.empty()
                  ? std::make_shared<ProvenanceRegistry>()
                  : std::shared_ptr<ProvenanceRegistry>(
                        ProvenanceRegistry::open(config.data_dir, {.retain_payloads = config.retain_payloads}))) {}

Service::Service(ServiceConfig config, std::shared_ptr<BackendRegistry> backends, std::shared_ptr<ProvenanceRegistry> provenance)
    : config_(std::move(config)), backends_(std::move(backends)), provenance_(std::move(provenance)), runs_(backends_) {
    if (config_.backend_table)
        for (auto& [id, endpoint] : load_endpoint_table(*config_.backend_table)) backends_->register_remote(id, endpoint);
}

Response Service::handle(std::string_view method, std::string_view target, std::string_view body, std::string_view remote_addr) {
    const auto path = target.substr(0, target.find('?'));
    auto starts = [&](std::string_view p) { return path.substr(0, p.size()) == p; };
    try {
        if (method == "POST" && path == "/flows") return post_flow(body);
        if (method == "GET" && starts("/flows/")) return get_flow(percent_decode(path.substr(7)));
        if (method == "POST" && path == "/runs") return post_run(body, remote_addr);
        if (starts("/runs/")) {
            const auto rest = path.substr(6);
            const auto slash = rest.find('/');
            const auto id = percent_decode(rest.substr(0, slash));
            if (method == "GET" && slash == std::string_view::npos) return get_run(id);
            if (method == "POST" && rest.substr(slash + 1) == "checkpoint") return post_checkpoint(id, body, remote_addr);
        }
        if (method == "POST" && path == "/registry/register") return post_register(body, remote_addr);
        if (method == "POST" && path == "/registry/search") return post_search(body);
        if (method == "GET" && starts("/registry/")) return get_record(path.substr(10));
        if (method == "GET" && starts("/experiments/")) return get_experiment(path.substr(13));
        return api_error("not_found", fmt::format("no route for {} {}", method, path));
    } catch (const Error& e) {
        return api_error(api_error_code(e.code()), e.what());
    } catch (const json::exception& e) {
        return api_error("bad_request", e.what());
    } catch (const std::exception& e) {
        return api_error("internal", e.what());
    }
}

Response Service::post_flow(std::string_view body) {
    auto spec = parse_flow_spec(body);
    if (auto report = validate_flow(spec); !report.empty())
        return json_response(422, json{{"error", {{"code", "bad_request"}, {"message", "flow failed validation"}}},
                                       {"report", report_json(report)}});
    std::unique_lock lock(flows_mutex_);
    auto id = fmt::format("flow-{}", next_flow_++);
    flows_.emplace(id, std::move(spec));
    return json_response(201, json{{"flow_id", id}});
}

Response Service::get_flow(const std::string& id) const {
    std::shared_lock lock(flows_mutex_);
    auto it = flows_.find(id);
    if (it == flows_.end()) throw Error(ErrorCode::NotFound, fmt::format("no flow {}", id));
    return json_response(200, json::parse(to_document(it->second)));
}

Response Service::post_run(std::string_view body, std::string_view remote_addr) {
    const auto req = parse_body(body);
    FlowSpec spec;
    if (req.contains("flow")) {
        spec = parse_flow_spec(req.at("flow").dump());
    } else {
        const auto id = req.at("flow_id").get<std::string>();
        std::shared_lock lock(flows_mutex_);
        auto it = flows_.find(id);
        if (it == flows_.end()) throw Error(ErrorCode::NotFound, fmt::format("no flow {}", id));
        spec = it->second;
    }
    std::map<std::string, Artifact> inputs;
    if (req.contains("inputs"))
        for (const auto& [key, value] : req.at("inputs").items()) inputs.emplace(key, make_artifact(wire::decode_payload(value)));

    auto run = runs_.start_run(spec, std::move(inputs));
    {
        std::lock_guard lock(meta_mutex_);
        run_meta_[run.run_id].user = opt_string(req, "user").value_or(config_.default_user);
    }
    if (run.status.kind == RunStatusKind::Completed) register_outputs(run, remote_addr);
    return json_response(201, run_view(run));
}

Response Service::get_run(const std::string& id) const { return json_response(200, run_view(runs_.get_run(id))); }

Response Service::post_checkpoint(const std::string& id, std::string_view body, std::string_view remote_addr) {
    const auto req = parse_body(body);
    const auto node = req.at("node_id").get<std::string>();
    const auto edited = make_artifact(wire::decode_payload(req.at("artifact")));
    auto run = runs_.submit_checkpoint_edit(id, node, edited);
    if (run.status.kind == RunStatusKind::Completed) register_outputs(run, remote_addr);
    return json_response(200, run_view(run));
}

void Service::register_outputs(const RunState& run, std::string_view remote_addr) {
    std::string user;
    {
        std::lock_guard lock(meta_mutex_);
        auto& meta = run_meta_[run.run_id];
        if (meta.registered) return;
        meta.registered = true;
        user = meta.user.empty() ? config_.default_user : meta.user;
    }
    std::map<std::string, std::string> uris;
    for (const auto& node : run.flow.outputs) {
        auto it = run.artifacts.find(node);
        if (it == run.artifacts.end()) continue;
        const auto& artifact = it->second;
        RegistrationContext ctx{config_.device, std::string(remote_addr), user, now_utc_seconds(), run.run_id, artifact.stage_kind};
        RegisterOptions opts{run.flow.name, {}, fmt::format("output of node {}", node)};
        for (const auto& parent : artifact.parent_ids)
            if (auto u = provenance_->uri_of(parent)) opts.parent_uris.push_back(*u);
        uris[node] = provenance_->register_artifact(artifact, ctx, opts).uri;
    }
    std::lock_guard lock(meta_mutex_);
    run_meta_[run.run_id].output_uris = std::move(uris);
}

json Service::run_view(const RunState& run) const {
    json j{{"run_id", run.run_id}, {"flow", run.flow.name}, {"status", status_json(run.status)}};
    j["artifacts"] = json::object();
    for (const auto& [node, a] : run.artifacts) j["artifacts"][node] = wire::encode_artifact(a);
    if (run.pending) j["pending"] = wire::encode_artifact(*run.pending);
    j["checkpoints_visited"] = run.checkpoints_visited;
    j["log"] = json::array();
    for (const auto& e : run.log)
        j["log"].push_back({{"node", e.node}, {"start_ms", e.start_ms}, {"end_ms", e.end_ms}, {"backend", e.backend}});
    j["outputs"] = json::object();
    std::lock_guard lock(meta_mutex_);
    if (auto it = run_meta_.find(run.run_id); it != run_meta_.end())
        for (const auto& [node, uri] : it->second.output_uris) j["outputs"][node] = uri;
    return j;
}

Response Service::post_register(std::string_view body, std::string_view remote_addr) {
    const auto req = parse_body(body);
    const auto artifact = make_artifact(wire::decode_payload(req.at("artifact")));
    const json ctx_json = req.value("context", json::object());
    RegistrationContext ctx;
    ctx.device = ctx_json.value("device", std::string("api"));
    ctx.ip = ctx_json.value("ip", std::string(remote_addr));
    ctx.user_account = ctx_json.value("user_account", config_.default_user);
    ctx.timestamp = ctx_json.value("timestamp", now_utc_seconds());
    ctx.flow_run_id = opt_string(ctx_json, "flow_run_id");
    ctx.stage_kind = opt_string(ctx_json, "stage_kind");
    RegisterOptions opts;
    opts.flow_name = req.value("flow_name", std::string());
    opts.parent_uris = req.value("parent_uris", std::vector<std::string>{});
    opts.note = req.value("note", std::string());
    return json_response(201, record_json(provenance_->register_artifact(artifact, ctx, opts)));
}

Response Service::get_record(std::string_view encoded_uri) const {
    return json_response(200, record_json(provenance_->lookup(percent_decode(encoded_uri))));
}

Response Service::post_search(std::string_view body) const {
    const auto req = parse_body(body);
    const auto k = req.value("k", std::size_t{5});
    if (k == 0) throw Error(ErrorCode::Syntax, "k must be at least 1");
    QueryResult hits;
    if (req.contains("artifact")) {
        hits = provenance_->search(wire::decode_payload(req.at("artifact")), k);
    } else if (req.contains("embedding")) {
        const auto& e = req.at("embedding");
        const auto m = modality_from_string(e.at("modality").get<std::string>());
        if (!m) throw Error(ErrorCode::Syntax, "unknown embedding modality");
        Embedding q{*m, e.at("values").get<std::vector<float>>(), false};
        hits = provenance_->search(q, k);
    } else {
        throw Error(ErrorCode::Syntax, "search needs an artifact or an embedding");
    }
    json out = json::array();
    for (const auto& h : hits) out.push_back({{"uri", h.uri}, {"score", h.score}, {"index", h.index}});
    return json_response(200, json{{"results", out}});
}

Response Service::get_experiment(std::string_view name) {
    if (name != "fig5" && name != "fig6") throw Error(ErrorCode::NotFound, fmt::format("no experiment {}", name));
    std::lock_guard lock(experiments_mutex_);
    auto it = experiment_csv_.find(std::string(name));
    if (it == experiment_csv_.end()) {
        const auto report = name == "fig5" ? run_fig5() : run_fig6();
        it = experiment_csv_.emplace(std::string(name), to_csv(report)).first;
    }
    return {200, "text/csv", it->second};
}

void Service::serve() {
    httplib::Server server;
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
        auto target = req.target.empty() ? req.path : req.target;
        auto r = handle(req.method, target, req.body, req.remote_addr);
        res.status = r.status;
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_content(r.body, r.content_type);
    };
    server.Get(".*", route);
    server.Post(".*", route);
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
    const auto [host, port] = split_listen(config_.listen);
    const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error(ErrorCode::Io, fmt::format("cannot listen on {}", config_.listen));
    {
        std::lock_guard lock(server_mutex_);
        server_ = &server;
        bound_port_ = bound;
    }
    const bool ok = server.listen_after_bind();
    {
        std::lock_guard lock(server_mutex_);
        server_ = nullptr;
        bound_port_ = 0;
    }
    if (!ok) throw Error(ErrorCode::Io, fmt::format("stopped listening on {}", config_.listen));
}

int Service::bound_port() const {
    std::lock_guard lock(server_mutex_);
    return bound_port_;
}

void Service::stop() {
    std::lock_guard lock(server_mutex_);
    if (server_) static_cast<httplib::Server*>(server_)->stop();
}

}  // namespace maid
