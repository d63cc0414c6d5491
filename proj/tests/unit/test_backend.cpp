#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "maid/backend.hpp"
#include "maid/codec.hpp"
#include "maid/error.hpp"
#include "maid/mock_media.hpp"
#include "maid/tone_codec.hpp"
#include "maid/wire.hpp"
#include "test_support.hpp"

using namespace maid;
using json = nlohmann::json;

namespace {

/// Local HTTP server answering POSTs with a canned handler.
class StubServer {
public:
    explicit StubServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        server_.Post(".*", [this, handler](const httplib::Request& req, httplib::Response& res) {
            last_request_ = req.body;
            handler(req, res);
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }
    RemoteEndpoint endpoint(std::string_view path = "/invoke") const {
        return {"http://127.0.0.1:" + std::to_string(port_) + std::string(path), std::chrono::milliseconds(5000)};
    }
    json last_request() const { return json::parse(last_request_); }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
    std::string last_request_;
};

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected maid::Error");
    return ErrorCode::Io;
}

const ImageBuf& fixed_image() {
    static const auto img = mock_text_to_image("stub", 1, 8, 8);
    return img;
}

}  // namespace

TEST_CASE("remote stub echoing a fixed PPM yields an image artifact") {
    StubServer stub([](const httplib::Request&, httplib::Response& res) {
        res.set_content(json{{"status", "ok"}, {"output", wire::encode_payload(fixed_image())}}.dump(), "application/json");
    });
    const auto prompt = make_artifact(std::string("a red boat"));
    const Params params{{"seed", std::int64_t{3}}, {"width", std::int64_t{8}}};
    const auto out = remote_invoke(StageKind::TextToImage, std::span(&prompt, 1), params, stub.endpoint());
    CHECK(out.modality == Modality::Image);
    CHECK(out.image() == fixed_image());
    REQUIRE(out.parent_ids.size() == 1);
    CHECK(out.parent_ids[0] == prompt.id);

    const auto req = stub.last_request();
    CHECK(req["stage_kind"] == "TextToImage");
    CHECK(req["params"]["seed"] == 3);
    REQUIRE(req["inputs"].size() == 1);
    CHECK(req["inputs"][0]["modality"] == "text");
    CHECK(req["inputs"][0]["encoding"] == "utf8");
    CHECK(req["inputs"][0]["data"] == "a red boat");
}

TEST_CASE("remote error status becomes RemoteError") {
    StubServer stub([](const httplib::Request&, httplib::Response& res) {
        res.set_content(json{{"status", "error"}, {"code", "overloaded"}, {"message", "try later"}}.dump(), "application/json");
    });
    const auto prompt = make_artifact(std::string("x"));
    try {
        remote_invoke(StageKind::TextToImage, std::span(&prompt, 1), {}, stub.endpoint());
        FAIL("expected RemoteError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RemoteError);
        CHECK(std::string(e.what()).find("try later") != std::string::npos);
    }
}

TEST_CASE("wrong output modality becomes BadResponse") {
    StubServer stub([](const httplib::Request&, httplib::Response& res) {
        AudioBuf a;
        a.samples.assign(1600, 0);
        res.set_content(json{{"status", "ok"}, {"output", wire::encode_payload(a)}}.dump(), "application/json");
    });
    const auto prompt = make_artifact(std::string("x"));
    CHECK(code_of([&] { remote_invoke(StageKind::TextToImage, std::span(&prompt, 1), {}, stub.endpoint()); }) ==
          ErrorCode::BadResponse);
}

TEST_CASE("malformed and failed responses") {
    StubServer garbage([](const httplib::Request&, httplib::Response& res) { res.set_content("<html>", "text/html"); });
    StubServer down([](const httplib::Request&, httplib::Response& res) {
        res.status = 503;
        res.set_content("unavailable", "text/plain");
    });
    const auto prompt = make_artifact(std::string("x"));
    const auto in = std::span(&prompt, 1);
    CHECK(code_of([&] { remote_invoke(StageKind::Chat, in, {}, garbage.endpoint()); }) == ErrorCode::BadResponse);
    CHECK(code_of([&] { remote_invoke(StageKind::Chat, in, {}, down.endpoint()); }) == ErrorCode::Transport);
    // Nothing listens on port 1.
    CHECK(code_of([&] { remote_invoke(StageKind::Chat, in, {}, {"http://127.0.0.1:1/x", std::chrono::milliseconds(500)}); }) ==
          ErrorCode::Transport);
}

TEST_CASE("registry routes remote names through the endpoint") {
    StubServer stub([](const httplib::Request&, httplib::Response& res) {
        res.set_content(json{{"status", "ok"}, {"output", wire::encode_payload(std::string("remote says hi"))}}.dump(),
                        "application/json");
    });
    auto reg = BackendRegistry::with_mocks();
    reg.register_remote("llm", stub.endpoint());
    CHECK(reg.has("remote:llm", StageKind::Chat));
    const auto prompt = make_artifact(std::string("hello"));
    CHECK(std::get<std::string>(reg.invoke("remote:llm", StageKind::Chat, std::span(&prompt, 1), {})) == "remote says hi");
    CHECK(code_of([&] { reg.invoke("remote:other", StageKind::Chat, std::span(&prompt, 1), {}); }) == ErrorCode::NotFound);
}

TEST_CASE("endpoint table file") {
    testing::TempDir dir("endpoints");
    const auto path = dir.path() / "backends.json";
    write_file(path, as_bytes(R"({"llm": "http://127.0.0.1:9000/v1", "painter": "http://10.0.0.2:81/paint"})"));
    const auto table = load_endpoint_table(path);
    REQUIRE(table.size() == 2);
    CHECK(table.at("painter").url == "http://10.0.0.2:81/paint");
    write_file(path, as_bytes("not json"));
    CHECK(code_of([&] { load_endpoint_table(path); }) == ErrorCode::Syntax);
}

TEST_CASE("every mock is pure and returns its signature's modality") {
    const auto reg = BackendRegistry::with_mocks();
    const auto text = make_artifact(std::string("a bright harbour at night. the ai sings."));
    const auto image = make_artifact(mock_text_to_image("harbour", 1, 32, 32));
    const auto audio = make_artifact(mock_tts("hello"));
    const auto video = make_artifact(mock_text_to_video("harbour", 1, 3, 16, 16));
    auto pick = [&](Modality m) -> const Artifact& {
        switch (m) {
            case Modality::Text: return text;
            case Modality::Image: return image;
            case Modality::Audio: return audio;
            case Modality::Video: return video;
        }
        return text;
    };
    const Params params{{"length", std::int64_t{40}}, {"frames", std::int64_t{3}}, {"width", std::int64_t{16}},
                        {"height", std::int64_t{16}}, {"direction", std::string("en->zh")}};
    for (auto kind : kAllStageKinds) {
        CAPTURE(to_string(kind));
        std::vector<Artifact> in;
        for (const auto& port : signature(kind).inputs) in.push_back(pick(port.modality));
        const auto a = reg.invoke("mock", kind, in, params);
        CHECK(modality_of(a) == signature(kind).output);
        CHECK(reg.invoke("mock", kind, in, params) == a);
    }
}

TEST_CASE("stage signatures") {
    CHECK(signature(StageKind::Tts).output == Modality::Audio);
    CHECK(signature(StageKind::TextToImage).input_modality("in") == Modality::Text);
    CHECK(signature(StageKind::StyleTransfer).input_modality("style") == Modality::Image);
    CHECK(!signature(StageKind::StyleTransfer).input_modality("in").has_value());
    for (auto kind : kAllStageKinds) CHECK(stage_kind_from_string(to_string(kind)) == kind);
    CHECK(!stage_kind_from_string("FooGen").has_value());
}
