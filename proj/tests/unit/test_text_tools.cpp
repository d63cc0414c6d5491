#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "maid/error.hpp"
#include "maid/fingerprint.hpp"
#include "maid/text_tools.hpp"
#include "test_support.hpp"

using namespace maid;

TEST_CASE("bundled lexicon has 200 pairs") {
    const auto& lex = Lexicon::bundled();
    CHECK(lex.size() == 200);
    REQUIRE(lex.to_zh("love") != nullptr);
    CHECK(*lex.to_zh("love") == "爱");
    REQUIRE(lex.to_en("人类") != nullptr);
    CHECK(*lex.to_en("人类") == "human");
}

TEST_CASE("translation by table lookup") {
    const auto en_zh = TranslateDirection::EnToZh;
    CHECK(mock_translate("", en_zh).empty());
    CHECK(mock_translate("qqq", en_zh) == "qqq");
    CHECK(mock_translate("love", en_zh) == "爱");
    CHECK(mock_translate("Love, human!", en_zh) == "爱, 人类!");
    CHECK(mock_translate("爱", TranslateDirection::ZhToEn) == "love");
    CHECK(mock_translate("qqq", TranslateDirection::ZhToEn) == "qqq");
    for (const auto& [en, zh] : Lexicon::bundled().entries()) CHECK(mock_translate(zh, TranslateDirection::ZhToEn) == en);
}

TEST_CASE("direction parsing") {
    CHECK(parse_direction("zh->en") == TranslateDirection::ZhToEn);
    CHECK(parse_direction("en-zh") == TranslateDirection::EnToZh);
    CHECK_THROWS_AS(parse_direction("fr->en"), Error);
}

TEST_CASE("lexicon text form") {
    const auto lex = Lexicon::parse("# header\nsun\t太阳\n\nmoon\t月亮\n");
    CHECK(lex.size() == 2);
    CHECK(mock_translate("sun and moon", TranslateDirection::EnToZh, lex) == "太阳 and 月亮");
}

TEST_CASE("prompt expansion ranks an exact keyword first") {
    const auto& kb = KeywordKb::bundled();
    REQUIRE(!kb.empty());
    const auto& entry = kb.entries()[2];
    const auto ranked = rank_keywords(entry.keyword, kb);
    CHECK(ranked.front().index == 2);
    CHECK(ranked.front().score == doctest::Approx(1.0).epsilon(1e-6));
    std::string expected = entry.keyword;
    for (const auto& t : entry.tags) expected += ", " + t;
    CHECK(prompt_expand(entry.keyword, kb, 1) == expected);
}

TEST_CASE("k beyond the knowledge base appends every entry") {
    KeywordKb kb;
    kb.add("red sky", {"sunset"});
    kb.add("blue sea", {"waves", "foam"});
    const auto out = prompt_expand("red sea", kb, 10);
    CHECK(out.rfind("red sea, ", 0) == 0);
    for (std::string_view tag : {"sunset", "waves", "foam"}) CHECK(out.find(tag) != std::string::npos);
}

TEST_CASE("ranking equals brute-force cosine over a 20-entry base") {
    std::mt19937_64 rng(4);
    KeywordKb kb;
    std::vector<std::string> keywords;
    for (int i = 0; i < 20; ++i) {
        keywords.push_back(testing::random_string(rng, "abcde fgh", 6 + rng() % 10));
        if (normalize_text(keywords.back()).empty()) keywords.back() = "x" + keywords.back();
        kb.add(keywords.back(), {"tag" + std::to_string(i)});
    }
    for (int q = 0; q < 20; ++q) {
        const auto prompt = testing::random_string(rng, "abcde fgh", 12) + "z";
        const auto query = embed_text(prompt);
        std::vector<double> score(20);
        for (int i = 0; i < 20; ++i) score[i] = cosine(query, embed_text(keywords[i]));
        std::vector<std::size_t> order(20);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return score[a] > score[b]; });
        const auto ranked = rank_keywords(prompt, kb);
        REQUIRE(ranked.size() == 20);
        for (std::size_t i = 0; i < 20; ++i) {
            CHECK(ranked[i].index == order[i]);
            CHECK(ranked[i].score == doctest::Approx(score[order[i]]).epsilon(1e-12));
        }
        std::string expected = prompt;
        for (std::size_t i = 0; i < 3; ++i) expected += ", tag" + std::to_string(order[i]);
        CHECK(prompt_expand(prompt, kb, 3) == expected);
    }
}

TEST_CASE("empty knowledge base") {
    try {
        prompt_expand("anything", KeywordKb{}, 3);
        FAIL("expected EmptyKb");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyKb);
    }
}
