#include <doctest.h>

#include <algorithm>
#include <random>

#include "flow_gen.hpp"
#include "maid/codec.hpp"
#include "maid/error.hpp"
#include "maid/flow.hpp"
#include "test_support.hpp"

using namespace maid;

namespace {

std::string doc(std::string_view nodes, std::string_view edges, std::string_view inputs, std::string_view outputs) {
    return std::string(R"({"name": "t", "nodes": [)") + std::string(nodes) + R"(], "edges": [)" + std::string(edges) +
           R"(], "inputs": [)" + std::string(inputs) + R"(], "outputs": [)" + std::string(outputs) + "]}";
}

ErrorCode parse_error(std::string_view text) {
    try {
        parse_flow_spec(text);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a parse error");
    return ErrorCode::Io;
}

bool has_issue(const ValidationReport& r, IssueKind k) {
    return std::any_of(r.begin(), r.end(), [k](const Issue& i) { return i.kind == k; });
}

FlowSpec bundled(std::string_view name) {
    return parse_flow_spec(testing::read_source_file(std::string("data/flows/") + std::string(name)));
}

}  // namespace

TEST_CASE("bundled flow 1 is a three-node chain with a text checkpoint") {
    const auto spec = bundled("flow1.json");
    REQUIRE(spec.nodes.size() == 3);
    CHECK(spec.node("write")->kind == StageKind::TextGen);
    CHECK(spec.node("write")->checkpoint);
    CHECK(spec.node("paint")->kind == StageKind::TextToImage);
    CHECK(spec.node("stylize")->kind == StageKind::StyleTransfer);
    CHECK(validate_flow(spec).empty());
    CHECK(plan_order(spec) == std::vector<std::string>{"write", "paint", "stylize"});
}

TEST_CASE("bundled flow 2 validates") {
    const auto spec = bundled("flow2.json");
    CHECK(validate_flow(spec).empty());
    CHECK(spec.node("caption")->kind == StageKind::ImageToText);
    CHECK(spec.node("narrate")->kind == StageKind::Tts);
    CHECK(spec.node("film")->kind == StageKind::TextToVideo);
    CHECK(plan_order(spec) == std::vector<std::string>{"caption", "script", "film", "narrate"});
}

TEST_CASE("parse errors") {
    CHECK(parse_error(doc(R"({"id": "a", "kind": "FooGen"})", "", "", "")) == ErrorCode::UnknownStageKind);
    CHECK(parse_error(doc("", "", "", "")) == ErrorCode::Syntax);
    CHECK(parse_error(doc(R"({"id": "a", "kind": "Tts"}, {"id": "a", "kind": "Asr"})", "", "", "")) == ErrorCode::DuplicateNodeId);
    CHECK(parse_error(doc(R"({"id": "a", "kind": "Tts", "colour": 1})", "", "", "")) == ErrorCode::Syntax);
    CHECK(parse_error(R"({"name": "t", "nodes": [{"id": "a", "kind": "Tts"}], "extra": true})") == ErrorCode::Syntax);
    CHECK(parse_error("{not json") == ErrorCode::Syntax);
}

TEST_CASE("audio into a text port is a modality mismatch") {
    const auto spec = parse_flow_spec(doc(R"({"id": "a", "kind": "Tts"}, {"id": "b", "kind": "TextToImage"})",
                                          R"(["a", "out", "b", "in"])", R"({"node": "a", "port": "in", "modality": "text"})",
                                          R"("b")"));
    const auto report = validate_flow(spec);
    REQUIRE(has_issue(report, IssueKind::ModalityMismatch));
    const auto it = std::find_if(report.begin(), report.end(), [](const Issue& i) { return i.kind == IssueKind::ModalityMismatch; });
    CHECK(it->edge == 0u);
}

TEST_CASE("two-node loop is a cycle") {
    const auto spec = parse_flow_spec(doc(R"({"id": "a", "kind": "Chat"}, {"id": "b", "kind": "Chat"})",
                                          R"(["a", "out", "b", "in"], ["b", "out", "a", "in"])", "", R"("b")"));
    CHECK(has_issue(validate_flow(spec), IssueKind::CycleDetected));
}

TEST_CASE("unfed ports, unreachable outputs and illegal checkpoints are reported") {
    const auto unfed = parse_flow_spec(doc(R"({"id": "a", "kind": "StyleTransfer"})", "",
                                           R"({"node": "a", "port": "content", "modality": "image"})", R"("a")"));
    CHECK(has_issue(validate_flow(unfed), IssueKind::UnfedPort));
    const auto audio_checkpoint = parse_flow_spec(doc(R"({"id": "a", "kind": "Tts", "checkpoint": true})", "",
                                                      R"({"node": "a", "port": "in", "modality": "text"})", R"("a")"));
    CHECK(has_issue(validate_flow(audio_checkpoint), IssueKind::IllegalCheckpoint));
    const auto bad_input = parse_flow_spec(doc(R"({"id": "a", "kind": "Tts"})", "",
                                               R"({"node": "a", "port": "in", "modality": "image"})", R"("a")"));
    CHECK(has_issue(validate_flow(bad_input), IssueKind::ModalityMismatch));
}

TEST_CASE("plan order: chain, diamond tie-break, single node") {
    const auto chain = parse_flow_spec(doc(R"({"id": "c", "kind": "Chat"}, {"id": "b", "kind": "Chat"}, {"id": "a", "kind": "Chat"})",
                                           R"(["a", "out", "b", "in"], ["b", "out", "c", "in"])",
                                           R"({"node": "a", "port": "in", "modality": "text"})", R"("c")"));
    CHECK(plan_order(chain) == std::vector<std::string>{"a", "b", "c"});
    const auto diamond = parse_flow_spec(
        doc(R"({"id": "d", "kind": "StyleTransfer"}, {"id": "c", "kind": "ImageEdit"}, {"id": "b", "kind": "ImageEdit"}, {"id": "a", "kind": "TextToImage"})",
            R"(["a", "out", "b", "in"], ["a", "out", "c", "in"], ["b", "out", "d", "content"], ["c", "out", "d", "style"])",
            R"({"node": "a", "port": "in", "modality": "text"})", R"("d")"));
    CHECK(validate_flow(diamond).empty());
    CHECK(plan_order(diamond) == std::vector<std::string>{"a", "b", "c", "d"});
    const auto single = parse_flow_spec(doc(R"({"id": "only", "kind": "Chat"})", "",
                                            R"({"node": "only", "port": "in", "modality": "text"})", R"("only")"));
    CHECK(plan_order(single) == std::vector<std::string>{"only"});
}

TEST_CASE("documents round trip through to_document") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 50; ++t) {
        const auto spec = testing::random_flow(rng);
        const auto again = parse_flow_spec(to_document(spec));
        CHECK(to_document(again) == to_document(spec));
        CHECK(validate_flow(again).empty());
    }
}

TEST_CASE("generated flows validate; injected faults are rejected") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 300; ++t) {
        const auto spec = testing::random_flow(rng);
        REQUIRE(validate_flow(spec).empty());
        const auto plan = plan_order(spec);
        CHECK(plan.size() == spec.nodes.size());
        // Every edge goes forward in the plan.
        for (const auto& e : spec.edges) {
            const auto from = std::find(plan.begin(), plan.end(), e.from);
            const auto to = std::find(plan.begin(), plan.end(), e.to);
            CHECK(from < to);
        }
        auto mismatched = spec;
        if (testing::inject_mismatch(mismatched, rng)) CHECK(has_issue(validate_flow(mismatched), IssueKind::ModalityMismatch));
        auto cyclic = spec;
        if (testing::inject_cycle(cyclic, rng)) CHECK(has_issue(validate_flow(cyclic), IssueKind::CycleDetected));
    }
}
