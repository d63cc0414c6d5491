#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include <fmt/format.h>

#include "maid/codec.hpp"
#include "maid/error.hpp"
#include "maid/mock_media.hpp"
#include "maid/tone_codec.hpp"
#include "maid/uri.hpp"
#include "test_support.hpp"

using namespace maid;

namespace {

template <class F>
ErrorCode code_of(F&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected maid::Error");
    return ErrorCode::Io;
}

constexpr std::int64_t kMarch1st2023 = 1677628800;
constexpr std::string_view kEmptyDigest = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855";

RegistrationContext alice() { return {"laptop", "10.0.0.2", "alice", kMarch1st2023, std::nullopt, std::nullopt}; }

Artifact mixed_artifact(std::mt19937_64& rng, int i) {
    switch (i % 4) {
        case 0: return make_artifact(std::string("note number ") + std::to_string(i % 50));
        case 1: return make_artifact(mock_text_to_image(std::to_string(i % 30), 1, 16, 16));
        case 2: return make_artifact(mock_tts("clip " + std::to_string(rng() % 20)));
        default: return make_artifact(mock_text_to_video(std::to_string(i % 10), 2, 2, 16, 16));
    }
}

}  // namespace

TEST_CASE("mint: format instantiation") {
    CHECK(yyyymmdd(kMarch1st2023) == "20230301");
    CHECK(yyyymmdd(kMarch1st2023 - 1) == "20230228");
    const auto u0 = mint_uri(alice(), Modality::Text, kEmptyDigest, 0);
    CHECK(u0 == "maid://alice/text/20230301/e3b0c44298fc1c14-0");
    const auto u1 = mint_uri(alice(), Modality::Text, kEmptyDigest, 1);
    CHECK(u1 == "maid://alice/text/20230301/e3b0c44298fc1c14-1");
    CHECK(u0.substr(0, u0.size() - 1) == u1.substr(0, u1.size() - 1));
    CHECK(mint_uri(alice(), Modality::Video, kEmptyDigest, 9).find("/video/") != std::string::npos);
}

TEST_CASE("mint: 100000 random contexts give distinct URIs") {
    std::mt19937_64 rng(17);
    std::set<std::string> seen;
    const std::string users[] = {"alice", "bob", "carol"};
    for (std::uint64_t seq = 0; seq < 100000; ++seq) {
        RegistrationContext ctx{"dev", "127.0.0.1", users[rng() % 3], static_cast<std::int64_t>(1 + rng() % 2000000000),
                                std::nullopt, std::nullopt};
        // Few distinct digests, so uniqueness rests on the sequence number.
        const auto digest = content_hash(Payload{std::string(1, static_cast<char>('a' + rng() % 3))});
        seen.insert(mint_uri(ctx, static_cast<Modality>(rng() % 4), digest, seq));
    }
    CHECK(seen.size() == 100000);
}

TEST_CASE("context validation") {
    auto ctx = alice();
    CHECK_NOTHROW(validate(ctx));
    ctx.user_account = "";
    CHECK(code_of([&] { validate(ctx); }) == ErrorCode::Syntax);
    ctx.user_account = "a/b";
    CHECK(code_of([&] { validate(ctx); }) == ErrorCode::Syntax);
    ctx = alice();
    ctx.timestamp = 0;
    CHECK(code_of([&] { validate(ctx); }) == ErrorCode::Syntax);
}

TEST_CASE("description: minimal context has empty optionals and round-trips") {
    const auto d = build_description(alice(), Modality::Text, std::string(kEmptyDigest));
    CHECK(!d.context.flow_run_id);
    CHECK(!d.context.stage_kind);
    CHECK(d.flow_name.empty());
    CHECK(d.parent_uris.empty());
    const UriRecord rec{"maid://alice/text/20230301/e3b0c44298fc1c14-0", d, 0, std::string(kEmptyDigest), Modality::Text};
    const auto line = to_record_line(rec);
    CHECK(line.find('\n') == std::string::npos);
    CHECK(line.find("\"flow_run_id\":\"\"") != std::string::npos);
    CHECK(parse_record_line(line) == rec);
}

TEST_CASE("description: every field survives, parents keep their order") {
    auto ctx = alice();
    ctx.flow_run_id = "run-7";
    ctx.stage_kind = "TextGen";
    const std::vector<std::string> parents{"maid://z/text/20230301/ffff-3", "maid://a/image/20230301/0000-1",
                                           "maid://m/audio/20230301/1234-2"};
    const auto d = build_description(ctx, Modality::Audio, "ab", "movie", parents, "line one, \"quoted\"");
    const UriRecord rec{"maid://alice/audio/20230301/ab-4", d, 12, "ab", Modality::Audio};
    const auto back = parse_record_line(to_record_line(rec));
    CHECK(back == rec);
    CHECK(back.description.parent_uris == parents);
}

TEST_CASE("record lines keep the documented field order") {
    const UriRecord rec{"u", build_description(alice(), Modality::Image, "d"), 3, "d", Modality::Image};
    const auto line = to_record_line(rec);
    std::size_t last = 0;
    for (auto field : kRecordFields) {
        const auto at = line.find(fmt::format("\"{}\":", field));
        REQUIRE(at != std::string::npos);
        CHECK(at >= last);
        last = at;
    }
    CHECK(code_of([] { parse_record_line("{not json"); }) == ErrorCode::Syntax);
    CHECK(schema_header_line().find("maid.registry") != std::string::npos);
}

TEST_CASE("register: same text twice gives two URIs with identical embeddings") {
    ProvenanceRegistry prov;
    const auto a = prov.register_artifact(make_artifact(std::string("the same words")), alice());
    const auto b = prov.register_artifact(make_artifact(std::string("the same words")), alice());
    CHECK(a.uri != b.uri);
    CHECK(a.content_digest == b.content_digest);
    const auto va = prov.store().vector(Modality::Text, a.embedding_ref);
    const auto vb = prov.store().vector(Modality::Text, b.embedding_ref);
    double dotp = 0;
    for (std::size_t i = 0; i < va.size(); ++i) dotp += va[i] * vb[i];
    CHECK(dotp == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(prov.lookup(a.uri) == a);
    CHECK(code_of([&] { prov.lookup("maid://nobody/text/20230301/0-0"); }) == ErrorCode::NotFound);
}

TEST_CASE("register: embedder must match the artifact") {
    EmbeddingStore store;
    UriRegistry registry;
    const auto image = make_artifact(mock_text_to_image("cat", 1, 16, 16));
    CHECK(code_of([&] { register_output(image, alice(), Embedder(Modality::Text), store, registry); }) ==
          ErrorCode::EmbedderModalityMismatch);
    CHECK(store.count(Modality::Image) == 0);
    CHECK(registry.size() == 0);
}

TEST_CASE("register: 100 records survive save and reload") {
    testing::TempDir dir("prov");
    std::mt19937_64 rng(23);
    std::vector<UriRecord> made;
    {
        auto prov = ProvenanceRegistry::open(dir.path(), {.retain_payloads = true});
        for (int i = 0; i < 100; ++i) made.push_back(prov->register_artifact(mixed_artifact(rng, i), alice()));
        prov->save();
    }
    auto again = ProvenanceRegistry::open(dir.path(), {.retain_payloads = true});
    REQUIRE(again->registry().size() == 100);
    for (const auto& rec : made) {
        CHECK(again->lookup(rec.uri) == rec);
        CHECK(again->verify(rec.uri));
        const auto v = again->store().vector(rec.modality, rec.embedding_ref);
        CHECK(v.size() == embedding_dim(rec.modality));
        CHECK(again->store().uri(rec.modality, rec.embedding_ref) == rec.uri);
    }
    // Sequence numbers resume past the reloaded ones.
    const auto next = again->register_artifact(make_artifact(std::string("note number 0")), alice());
    CHECK(!std::any_of(made.begin(), made.end(), [&](const UriRecord& r) { return r.uri == next.uri; }));
}

TEST_CASE("registry and store files are journaled without an explicit save") {
    testing::TempDir dir("journal");
    std::vector<UriRecord> made;
    {
        auto prov = ProvenanceRegistry::open(dir.path());
        for (int i = 0; i < 5; ++i) made.push_back(prov->register_artifact(make_artifact("entry " + std::to_string(i)), alice()));
    }
    auto again = ProvenanceRegistry::open(dir.path());
    for (const auto& rec : made) CHECK(again->lookup(rec.uri) == rec);
}

TEST_CASE("recovery drops an interrupted registration") {
    testing::TempDir dir("crash");
    std::vector<UriRecord> made;
    {
        auto prov = ProvenanceRegistry::open(dir.path());
        for (int i = 0; i < 3; ++i) made.push_back(prov->register_artifact(make_artifact("kept " + std::to_string(i)), alice()));
    }
    // An embedding reached the disk, its record line only partly.
    {
        EmbeddingStore partial;
        partial.attach_journal(dir.path() / "vectors.urix");
        partial.put(embed_text("lost entry").modality, "", embed_text("lost entry").values);
        std::ofstream rec(dir.path() / "registry.jsonl", std::ios::app | std::ios::binary);
        rec << "{\"uri\":\"maid://alice/text/2023";
    }
    auto prov = ProvenanceRegistry::open(dir.path());
    CHECK(prov->registry().size() == 3);
    CHECK(prov->store().count(Modality::Text) == 3);
    for (const auto& rec : made) CHECK(prov->lookup(rec.uri) == rec);
    const auto next = prov->register_artifact(make_artifact(std::string("after the crash")), alice());
    CHECK(next.embedding_ref == 3);
    CHECK(prov->search(Payload{std::string("after the crash")}, 1).front().uri == next.uri);
}

TEST_CASE("verify notices a tampered payload") {
    testing::TempDir dir("verify");
    auto prov = ProvenanceRegistry::open(dir.path(), {.retain_payloads = true});
    const auto rec = prov->register_artifact(make_artifact(std::string("original words")), alice());
    CHECK(prov->verify(rec.uri));
    write_file(dir.path() / "payloads" / (rec.content_digest + ".bin"), as_bytes(std::string_view("forged words")));
    CHECK_FALSE(prov->verify(rec.uri));

    ProvenanceRegistry memory_only;
    const auto r2 = memory_only.register_artifact(make_artifact(std::string("x y z")), alice());
    CHECK_FALSE(memory_only.verify(r2.uri));
}

TEST_CASE("search finds the registered payload first") {
    ProvenanceRegistry prov;
    std::mt19937_64 rng(31);
    std::vector<UriRecord> made;
    for (int i = 0; i < 40; ++i) made.push_back(prov.register_artifact(mixed_artifact(rng, i * 7 + 1), alice()));
    const auto target = mock_text_to_image("target picture", 4, 16, 16);
    const auto rec = prov.register_artifact(make_artifact(target), alice());
    const auto hits = prov.search(Payload{target}, 3);
    REQUIRE(!hits.empty());
    CHECK(hits.front().uri == rec.uri);
    CHECK(hits.front().score == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("registry rejects duplicate uris and loads strictly") {
    UriRegistry reg;
    const UriRecord rec{"maid://a/text/20230301/00-0", build_description(alice(), Modality::Text, "00"), 0, "00", Modality::Text};
    reg.add(rec);
    CHECK(code_of([&] { reg.add(rec); }) == ErrorCode::Syntax);

    testing::TempDir dir("strict");
    save_registry(reg, dir.path() / "r.jsonl");
    CHECK(load_registry(dir.path() / "r.jsonl").records() == reg.records());
    {
        std::ofstream f(dir.path() / "r.jsonl", std::ios::app);
        f << "{\"uri\":";
    }
    CHECK(code_of([&] { load_registry(dir.path() / "r.jsonl"); }) == ErrorCode::Corrupt);
    CHECK(load_registry(dir.path() / "r.jsonl", true).size() == 1);
}
