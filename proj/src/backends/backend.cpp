#include "maid/backend.hpp"

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "maid/codec.hpp"
#include "maid/error.hpp"
#include "maid/mock_media.hpp"
#include "maid/text_tools.hpp"
#include "maid/tone_codec.hpp"
#include "maid/wire.hpp"

namespace maid {
namespace {

std::uint32_t side(const Params& p, std::string_view key) {
    const auto v = param_int(p, key, kDefaultImageSide);
    if (v < 0 || v > 0xFFFF) throw Error(ErrorCode::BadDimensions, fmt::format("{} = {}", key, v));
    return static_cast<std::uint32_t>(v);
}

std::uint64_t seed(const Params& p) { return static_cast<std::uint64_t>(param_int(p, "seed", kDefaultSeed)); }

std::size_t length(const Params& p) {
    const auto n = param_int(p, "length", kDefaultLength);
    if (n < 1) throw Error(ErrorCode::Syntax, "length must be >= 1");
    return static_cast<std::size_t>(n);
}

/// Splits "http://host:port/path" into the client base and the request path.
std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw Error(ErrorCode::Transport, fmt::format("bad endpoint url '{}'", url));
    const auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

const CharLm& bundled_lm() {
    static const CharLm lm = CharLm::train(bundled_corpus());
    return lm;
}

Payload run_mock(StageKind kind, std::span<const Artifact> in, const Params& p) {
    switch (kind) {
        case StageKind::TextGen:
            return bundled_lm().generate(in[0].text(), length(p), seed(p), param_double(p, "temperature", kDefaultTemperature));
        case StageKind::Chat: {
            const std::string prompt = in[0].text() + " ";
            const auto full = bundled_lm().generate(prompt, length(p), seed(p), param_double(p, "temperature", kDefaultTemperature));
            return full.substr(prompt.size());
        }
        case StageKind::TextToImage:
            return mock_text_to_image(in[0].text(), seed(p), side(p, "width"), side(p, "height"));
        case StageKind::ImageToText: return mock_image_to_text(in[0].image());
        case StageKind::StyleTransfer:
            return mock_style_transfer(in[0].image(), in[1].image(), param_double(p, "strength", kDefaultStrength));
        case StageKind::ImageEdit: return mock_image_edit(in[0].image(), param_double(p, "strength", kDefaultStrength));
        case StageKind::Tts: return mock_tts(in[0].text());
        case StageKind::Asr: return mock_asr(in[0].audio());
        case StageKind::TextToVideo: {
            const auto frames = param_int(p, "frames", kDefaultFrames);
            if (frames < 0 || frames > 0xFFFF) throw Error(ErrorCode::BadFrameCount, fmt::format("frames = {}", frames));
            return mock_text_to_video(in[0].text(), seed(p), static_cast<std::uint32_t>(frames), side(p, "width"),
                                      side(p, "height"));
        }
        case StageKind::VideoSummary: return mock_video_summary(in[0].video());
        case StageKind::Translate:
            return mock_translate(in[0].text(), parse_direction(param_string(p, "direction", "zh-en")));
        case StageKind::PromptExpand: {
            const auto k = param_int(p, "k", kDefaultExpandK);
            if (k < 1) throw Error(ErrorCode::Syntax, "k must be >= 1");
            return prompt_expand(in[0].text(), KeywordKb::bundled(), static_cast<std::size_t>(k));
        }
    }
    throw Error(ErrorCode::UnknownStageKind, "unhandled stage kind");
}

Artifact remote_invoke(StageKind kind, std::span<const Artifact> inputs, const Params& params, const RemoteEndpoint& endpoint) {
    nlohmann::json req;
    req["stage_kind"] = to_string(kind);
    req["params"] = wire::encode_params(params);
    req["inputs"] = nlohmann::json::array();
    for (const auto& a : inputs) req["inputs"].push_back(wire::encode_payload(a.payload));

    const auto [base, path] = split_url(endpoint.url);
    httplib::Client client(base);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(path, req.dump(), "application/json");
    if (!res) throw Error(ErrorCode::Transport, fmt::format("{}: {}", endpoint.url, httplib::to_string(res.error())));

    nlohmann::json body;
    try {
        body = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception&) {
        if (res->status >= 400) throw Error(ErrorCode::Transport, fmt::format("{} answered HTTP {}", endpoint.url, res->status));
        throw Error(ErrorCode::BadResponse, "response body is not JSON");
    }
    const auto status = body.value("status", std::string{});
    if (status == "error") {
        const auto code = body.contains("code") ? body["code"].dump() : std::to_string(res->status);
        throw Error(ErrorCode::RemoteError, fmt::format("code {}: {}", code, body.value("message", std::string{})));
    }
    if (status != "ok" || !body.contains("output")) throw Error(ErrorCode::BadResponse, "missing status/output");

    Payload payload;
    try {
        payload = wire::decode_payload(body["output"]);
    } catch (const Error& e) {
        throw Error(ErrorCode::BadResponse, e.what());
    }
    const auto expected = signature(kind).output;
    if (modality_of(payload) != expected)
        throw Error(ErrorCode::BadResponse, fmt::format("{} returned {}, expected {}", to_string(kind),
                                                        to_string(modality_of(payload)), to_string(expected)));
    std::vector<ArtifactId> parents;
    for (const auto& a : inputs) parents.push_back(a.id);
    return make_artifact(std::move(payload), std::move(parents), std::string(to_string(kind)));
}

BackendRegistry BackendRegistry::with_mocks() {
    BackendRegistry r;
    for (auto kind : kAllStageKinds) r.register_stage(std::string(kMock), kind, run_mock);
    return r;
}

void BackendRegistry::register_stage(std::string name, StageKind kind, StageFn fn) {
    table_[std::move(name)][kind] = std::move(fn);
}

void BackendRegistry::register_remote(const std::string& id, RemoteEndpoint endpoint) {
    const auto name = std::string(kRemotePrefix) + id;
    for (auto kind : kAllStageKinds) {
        register_stage(name, kind, [endpoint](StageKind k, std::span<const Artifact> in, const Params& p) {
            return remote_invoke(k, in, p, endpoint).payload;
        });
    }
}

bool BackendRegistry::has(std::string_view name, StageKind kind) const {
    auto it = table_.find(name);
    return it != table_.end() && it->second.contains(kind);
}

Payload BackendRegistry::invoke(std::string_view name, StageKind kind, std::span<const Artifact> inputs,
                                const Params& params) const {
    auto it = table_.find(name);
    if (it == table_.end()) throw Error(ErrorCode::NotFound, fmt::format("no backend named '{}'", name));
    auto fn = it->second.find(kind);
    if (fn == it->second.end())
        throw Error(ErrorCode::NotFound, fmt::format("backend '{}' does not implement {}", name, to_string(kind)));
    return fn->second(kind, inputs, params);
}

std::map<std::string, RemoteEndpoint> load_endpoint_table(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    std::map<std::string, RemoteEndpoint> out;
    try {
        const auto j = nlohmann::json::parse(bytes.begin(), bytes.end());
        for (const auto& [id, url] : j.items()) out[id] = RemoteEndpoint{url.get<std::string>()};
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Syntax, fmt::format("endpoint table {}: {}", path.string(), e.what()));
    }
    return out;
}

}  // namespace maid
