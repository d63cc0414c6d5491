// maid: command-line front end for flows, the provenance registry and the
// re-identification demos.

#include <cstdlib>
#include <iostream>
#include <iterator>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "maid/codec.hpp"
#include "maid/experiment.hpp"
#include "maid/run.hpp"
#include "maid/service.hpp"
#include "maid/uri.hpp"

namespace {

using json = nlohmann::json;
using namespace maid;

std::string default_data_dir() {
    if (const char* v = std::getenv("MAID_DATA_DIR"); v && *v) return v;
    return "maid-data";
}

std::string default_user() {
    if (const char* v = std::getenv("MAID_USER"); v && *v) return v;
    return "anonymous";
}

std::string read_text(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return {bytes.begin(), bytes.end()};
}

/// "node.port=path" or "port=path" when the port names exactly one input.
std::pair<std::string, std::filesystem::path> resolve_input(const FlowSpec& spec, const std::string& arg) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::Syntax, fmt::format("--input '{}' is not port=path", arg));
    const auto name = arg.substr(0, eq);
    std::vector<std::string> matches;
    for (const auto& in : spec.inputs)
        if (in.key() == name || in.port == name || in.node == name) matches.push_back(in.key());
    if (matches.size() != 1)
        throw Error(ErrorCode::InputModalityMismatch,
                    fmt::format("--input '{}' matches {} declared inputs", name, matches.size()));
    return {matches.front(), arg.substr(eq + 1)};
}

Artifact edit_at_checkpoint(const Artifact& pending, const std::string& node, bool interactive,
                            const std::map<std::string, std::filesystem::path>& edit_files) {
    if (auto it = edit_files.find(node); it != edit_files.end()) {
        std::cerr << fmt::format("checkpoint {}: using edit from {}\n", node, it->second.string());
        return make_artifact(load_payload(it->second));
    }
    if (interactive && pending.modality == Modality::Text) {
        std::cerr << fmt::format("checkpoint {} produced:\n{}\n", node, pending.text());
        std::cerr << "enter the edited text, end with EOF (empty keeps it):\n";
        std::string edited((std::istreambuf_iterator<char>(std::cin)), std::istreambuf_iterator<char>());
        std::cin.clear();
        while (!edited.empty() && (edited.back() == '\n' || edited.back() == '\r')) edited.pop_back();
        if (!edited.empty()) return make_artifact(std::move(edited));
    } else {
        std::cerr << fmt::format("checkpoint {}: accepting the {} output as is\n", node, to_string(pending.modality));
    }
    return make_artifact(pending.payload);
}

RegistrationContext cli_context(const std::string& user) {
    return {"maid-cli", "127.0.0.1", user, now_utc_seconds(), std::nullopt, std::nullopt};
}

json hits_json(const QueryResult& hits) {
    json out = json::array();
    for (const auto& h : hits) out.push_back({{"uri", h.uri}, {"score", h.score}, {"index", h.index}});
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multimodal information flows with URI-extension provenance"};
    app.require_subcommand(1);

    // flow
    auto* flow = app.add_subcommand("flow", "Validate or run a flow document");
    flow->require_subcommand(1);
    std::string flow_file;
    auto* validate_cmd = flow->add_subcommand("validate", "Type-check a flow document");
    validate_cmd->add_option("file", flow_file, "Flow document")->required()->check(CLI::ExistingFile);

    auto* run_cmd = flow->add_subcommand("run", "Execute a flow with the mock backends");
    std::vector<std::string> input_args;
    std::vector<std::string> edit_args;
    bool interactive_edit = false;
    std::string out_dir = "maid-out";
    std::string data_dir = default_data_dir();
    std::string user = default_user();
    std::string backend_table;
    bool no_register = false;
    run_cmd->add_option("file", flow_file, "Flow document")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--input,-i", input_args, "External input as port=path or node.port=path");
    run_cmd->add_flag("--edit", interactive_edit, "Edit text checkpoints interactively on stdin");
    run_cmd->add_option("--edit-file", edit_args, "Checkpoint edit as node=path");
    run_cmd->add_option("--out,-o", out_dir, "Directory for the output artifacts");
    run_cmd->add_option("--data-dir", data_dir, "Registry directory");
    run_cmd->add_option("--user", user, "Account recorded on registration");
    run_cmd->add_option("--backends", backend_table, "Remote endpoint table (JSON)");
    run_cmd->add_flag("--no-register", no_register, "Do not register the outputs");

    // registry
    auto* registry = app.add_subcommand("registry", "Register, look up and search outputs");
    registry->require_subcommand(1);
    std::string payload_path;
    std::string note;
    std::size_t k = 5;
    std::string uri;
    auto* reg_cmd = registry->add_subcommand("register", "Register a file (.txt, .ppm, .wav or a video directory)");
    reg_cmd->add_option("path", payload_path, "Artifact file")->required()->check(CLI::ExistingPath);
    reg_cmd->add_option("--user", user, "Account recorded on registration");
    reg_cmd->add_option("--note", note, "Free-text note");
    reg_cmd->add_option("--data-dir", data_dir, "Registry directory");
    auto* search_cmd = registry->add_subcommand("search", "Find the registered outputs closest to a file");
    search_cmd->add_option("path", payload_path, "Query file")->required()->check(CLI::ExistingPath);
    search_cmd->add_option("-k", k, "Number of results")->check(CLI::PositiveNumber);
    search_cmd->add_option("--data-dir", data_dir, "Registry directory");
    auto* lookup_cmd = registry->add_subcommand("lookup", "Print the record of a URI");
    lookup_cmd->add_option("uri", uri, "maid:// URI")->required();
    lookup_cmd->add_option("--data-dir", data_dir, "Registry directory");

    // demo
    auto* demo = app.add_subcommand("demo", "Re-identification experiments");
    std::string which;
    std::string report_path = "report.csv";
    std::uint64_t seed = 7;
    demo->add_option("experiment", which, "fig5 (images) or fig6 (texts)")->required()->check(CLI::IsMember({"fig5", "fig6"}));
    demo->add_option("--out,-o", report_path, "CSV scatter report");
    demo->add_option("--seed", seed, "Experiment seed");

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    ServiceConfig cfg = config_from_env();
    std::string listen = cfg.listen;
    serve->add_option("--listen", listen, "host:port");
    serve->add_option("--data-dir", data_dir, "Registry directory");
    serve->add_option("--user", user, "Default account");
    serve->add_option("--backends", backend_table, "Remote endpoint table (JSON)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate_cmd->parsed()) {
            const auto spec = parse_flow_spec(read_text(flow_file));
            const auto report = validate_flow(spec);
            std::cout << json{{"flow", spec.name}, {"valid", report.empty()}, {"report", report_json(report)}}.dump(2) << "\n";
            return report.empty() ? 0 : 1;
        }

        if (run_cmd->parsed()) {
            const auto spec = parse_flow_spec(read_text(flow_file));
            auto backends = BackendRegistry::with_mocks();
            if (!backend_table.empty())
                for (auto& [id, ep] : load_endpoint_table(backend_table)) backends.register_remote(id, ep);
            std::map<std::string, Artifact> inputs;
            for (const auto& arg : input_args) {
                auto [key, path] = resolve_input(spec, arg);
                inputs.emplace(key, make_artifact(load_payload(path)));
            }
            std::map<std::string, std::filesystem::path> edit_files;
            for (const auto& arg : edit_args) {
                const auto eq = arg.find('=');
                if (eq == std::string::npos) throw Error(ErrorCode::Syntax, fmt::format("--edit-file '{}' is not node=path", arg));
                edit_files.emplace(arg.substr(0, eq), arg.substr(eq + 1));
            }

            auto run = start_run(spec, std::move(inputs), backends);
            while (run.status.kind == RunStatusKind::AwaitingEdit) {
                const auto node = run.status.node;
                auto edited = edit_at_checkpoint(*run.pending, node, interactive_edit, edit_files);
                run = submit_checkpoint_edit(std::move(run), node, edited, backends);
            }
            if (run.status.kind != RunStatusKind::Completed) {
                std::cerr << fmt::format("run {} failed at {}: {}\n", run.run_id, run.status.node, run.status.reason);
                return 2;
            }

            std::unique_ptr<ProvenanceRegistry> prov;
            if (!no_register) prov = ProvenanceRegistry::open(data_dir, {.retain_payloads = true});
            std::filesystem::create_directories(out_dir);
            json summary{{"run_id", run.run_id}, {"flow", spec.name}, {"outputs", json::object()}};
            for (const auto& node : spec.outputs) {
                const auto& artifact = run.artifacts.at(node);
                json entry{{"file", save_payload(artifact.payload, std::filesystem::path(out_dir) / node).string()},
                           {"modality", to_string(artifact.modality)}};
                if (prov) {
                    auto ctx = cli_context(user);
                    ctx.flow_run_id = run.run_id;
                    ctx.stage_kind = artifact.stage_kind;
                    entry["uri"] = prov->register_artifact(artifact, ctx, {spec.name, {}, fmt::format("output of node {}", node)}).uri;
                }
                summary["outputs"][node] = std::move(entry);
            }
            std::cout << summary.dump(2) << "\n";
            return 0;
        }

        if (reg_cmd->parsed()) {
            auto prov = ProvenanceRegistry::open(data_dir, {.retain_payloads = true});
            const auto artifact = make_artifact(load_payload(payload_path));
            const auto rec = prov->register_artifact(artifact, cli_context(user), {{}, {}, note});
            std::cout << record_json(rec).dump(2) << "\n";
            return 0;
        }

        if (search_cmd->parsed()) {
            auto prov = ProvenanceRegistry::open(data_dir);
            std::cout << json{{"results", hits_json(prov->search(load_payload(payload_path), k))}}.dump(2) << "\n";
            return 0;
        }

        if (lookup_cmd->parsed()) {
            auto prov = ProvenanceRegistry::open(data_dir);
            std::cout << record_json(prov->lookup(uri)).dump(2) << "\n";
            return 0;
        }

        if (demo->parsed()) {
            const auto report = which == "fig5" ? run_fig5(seed) : run_fig6(seed);
            const auto csv = to_csv(report);
            write_file(report_path, as_bytes(csv));
            json per_op = json::object();
            for (const auto& t : report.per_operator) per_op[t.name] = {{"hits", t.hits}, {"trials", t.trials}};
            std::cout << json{{"experiment", which},
                              {"modality", to_string(report.modality)},
                              {"accuracy", report.accuracy},
                              {"trials", report.trials},
                              {"per_operator", per_op},
                              {"noise_to_positive", report.noise_to_positive},
                              {"noise_to_negative", report.noise_to_negative},
                              {"centroid_property", report.centroid_property},
                              {"report", report_path}}
                             .dump(2)
                      << "\n";
            return 0;
        }

        if (serve->parsed()) {
            cfg.listen = listen;
            cfg.data_dir = data_dir;
            cfg.default_user = user;
            if (!backend_table.empty()) cfg.backend_table = backend_table;
            Service service(cfg);
            std::cerr << fmt::format("listening on {} (data in {})\n", cfg.listen, cfg.data_dir.string());
            service.serve();
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
