#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "maid/error.hpp"
#include "maid/experiment.hpp"
#include "maid/fingerprint.hpp"
#include "maid/mock_media.hpp"
#include "maid/tone_codec.hpp"
#include "test_support.hpp"

using namespace maid;

namespace {

std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc;
        for (std::size_t t = 0; t < n; ++t)
            acc += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n));
        out[k] = acc;
    }
    return out;
}

AudioBuf sine(double hz, std::size_t n) {
    AudioBuf a;
    a.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        a.samples[i] = static_cast<std::int16_t>(std::lround(12000.0 * std::sin(2.0 * std::numbers::pi * hz * i / 16000.0)));
    return a;
}

std::size_t argmax(const std::vector<float>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

ImageBuf flat(std::uint32_t w, std::uint32_t h, std::uint8_t value) {
    ImageBuf img(w, h);
    std::fill(img.pixels.begin(), img.pixels.end(), value);
    return img;
}

}  // namespace

TEST_CASE("fnv1a32 reference vectors") {
    CHECK(fnv1a32("") == 0x811c9dc5u);
    CHECK(fnv1a32("a") == 0xe40c292cu);
    CHECK(fnv1a32("foobar") == 0xbf9cf968u);
}

TEST_CASE("text: single 3-gram lands in one bucket at 1.0") {
    const auto e = embed_text("aaaa");
    CHECK(e.values.size() == 256);
    CHECK(std::count_if(e.values.begin(), e.values.end(), [](float v) { return v != 0.0f; }) == 1);
    CHECK(e.values[fnv1a32("aaa") % 256] == doctest::Approx(1.0));
}

TEST_CASE("text: case and whitespace runs do not change the embedding") {
    CHECK(cosine(embed_text("abc def"), embed_text("ABC   def")) == doctest::Approx(1.0).epsilon(1e-6));
    std::mt19937_64 rng(4);
    for (int t = 0; t < 50; ++t) {
        const auto s = testing::random_string(rng, "abcdef ghij", 5 + rng() % 60);
        std::string noisy;
        for (char c : s) {
            if (c == ' ') noisy += std::string(1 + rng() % 3, rng() % 2 ? ' ' : '\t');
            else noisy.push_back(rng() % 2 ? static_cast<char>(std::toupper(c)) : c);
        }
        if (normalize_text(s).empty()) continue;
        CHECK(embed_text(s).values == embed_text("  " + noisy + " \n").values);
    }
}

TEST_CASE("text: empty content is rejected") {
    CHECK_THROWS_AS(embed_text("   \t\n"), Error);
}

TEST_CASE("text: reordered movie plot stays closer than an unrelated plot") {
    const auto corpus = std::string(bundled_corpus());
    const auto plot = corpus.substr(0, corpus.find("\n\n"));
    const auto war = corpus.substr(corpus.find("The war between"));
    const auto unrelated = war.substr(0, war.find("\n\n"));
    auto sentences = perturb::split_sentences(plot);
    REQUIRE(sentences.size() >= 4);
    std::reverse(sentences.begin(), sentences.end());
    const auto base = embed_text(plot);
    const double reordered = cosine(base, embed_text(perturb::join_sentences(sentences)));
    CHECK(reordered > cosine(base, embed_text(unrelated)));
    CHECK(reordered < 1.0);
}

TEST_CASE("image: half black half white gives +-1/8 cells") {
    ImageBuf img(64, 64);
    for (std::uint32_t y = 0; y < 64; ++y)
        for (std::uint32_t x = 32; x < 64; ++x) std::fill_n(img.at(x, y), 3, 255);
    const auto e = embed_image(img);
    REQUIRE(e.values.size() == 64);
    CHECK_FALSE(e.degenerate);
    for (int j = 0; j < 8; ++j)
        for (int i = 0; i < 8; ++i) CHECK(e.values[j * 8 + i] == doctest::Approx(i < 4 ? -0.125 : 0.125).epsilon(1e-6));
}

TEST_CASE("image: flat image is degenerate and scores zero") {
    const auto e = embed_image(flat(16, 16, 128));
    CHECK(e.degenerate);
    CHECK(std::all_of(e.values.begin(), e.values.end(), [](float v) { return v == 0.0f; }));
    CHECK(cosine(e, e) == 0.0);
    CHECK(cosine(e, embed_image(mock_text_to_image("x", 1, 16, 16))) == 0.0);
}

TEST_CASE("image: too small") {
    try {
        embed_image(flat(7, 9, 1));
        FAIL("expected TooSmall");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TooSmall);
    }
}

TEST_CASE("image: masked high-contrast image keeps cosine above 0.7") {
    // Two-tone 4x4 block images, half black and half white.
    Rng rng(12);
    int above = 0, beats_other = 0;
    double total = 0.0;
    constexpr int kTrials = 200;
    auto blocks = [&] {
        std::array<int, 16> bits{1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0};
        std::shuffle(bits.begin(), bits.end(), rng);
        ImageBuf img(64, 64);
        for (std::uint32_t y = 0; y < 64; ++y)
            for (std::uint32_t x = 0; x < 64; ++x) std::fill_n(img.at(x, y), 3, bits[(y / 16) * 4 + x / 16] ? 255 : 0);
        return img;
    };
    for (int t = 0; t < kTrials; ++t) {
        const auto original = blocks();
        const auto other = blocks();
        const auto base = embed_image(original);
        const double c = cosine(base, embed_image(perturb::mask_region(original, rng)));
        total += c;
        above += c > 0.7;
        beats_other += c > cosine(base, embed_image(other));
    }
    CHECK(total / kTrials > 0.7);
    CHECK(above >= kTrials * 9 / 10);
    CHECK(beats_other >= kTrials * 9 / 10);
}

TEST_CASE("image: masked procedural image stays closer than an independent one") {
    const auto originals = procedural_images(40, "masked", 3);
    const auto others = procedural_images(40, "other", 99);
    Rng rng(12);
    int closer = 0;
    for (std::size_t i = 0; i < originals.size(); ++i) {
        const auto& img = std::get<ImageBuf>(originals[i]);
        const auto base = embed_image(img);
        closer += cosine(base, embed_image(perturb::mask_region(img, rng))) > cosine(base, embed(others[i]));
    }
    CHECK(closer >= 36);
}

TEST_CASE("audio: 1 kHz sine peaks in band 3, confirmed by a direct DFT") {
    const auto tone = sine(1000.0, 4096);
    const auto e = embed_audio(tone);
    CHECK(argmax(e.values) == 3);

    std::vector<double> frame(1024);
    for (std::size_t i = 0; i < 1024; ++i) frame[i] = tone.samples[i] / 32768.0;
    const auto spec = naive_dft(frame);
    std::vector<double> bands(32, 0.0);
    for (std::size_t bin = 1; bin <= 512; ++bin) bands[(bin - 1) / 16] += std::abs(spec[bin]);
    CHECK(std::max_element(bands.begin(), bands.end()) - bands.begin() == 3);

    const auto features = dsp::band_features(frame);
    for (std::size_t b = 0; b < 32; ++b) CHECK(features[b] == doctest::Approx(std::log1p(bands[b])).epsilon(1e-9));
}

TEST_CASE("audio: fft agrees with a direct DFT") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t n : {2u, 8u, 64u, 1024u}) {
        std::vector<double> x(n);
        for (auto& v : x) v = u(rng);
        std::vector<std::complex<double>> fast(x.begin(), x.end());
        dsp::fft(fast);
        const auto slow = naive_dft(x);
        for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(fast[k] - slow[k]) < 1e-9 * static_cast<double>(n));
    }
}

TEST_CASE("audio: silence is degenerate, short clips rejected") {
    AudioBuf silence;
    silence.samples.assign(4096, 0);
    CHECK(embed_audio(silence).degenerate);
    AudioBuf tiny;
    tiny.samples.assign(1023, 5);
    CHECK_THROWS_AS(embed_audio(tiny), Error);
}

TEST_CASE("audio: one changed symbol stays closer than unrelated speech") {
    const std::string s = "the harbour lights went out one by one.";
    REQUIRE(s.size() == 39);
    std::string changed = s + "x";
    std::string base_text = s + "s";
    const auto base = embed_audio(mock_tts(base_text));
    const auto near = embed_audio(mock_tts(changed));
    const auto far = embed_audio(mock_tts("quick brown foxes jump over lazy dogs!!"));
    CHECK(cosine(base, near) > cosine(base, far));
}

TEST_CASE("video: identical frames leave the motion half empty") {
    const auto frame = mock_text_to_image("still", 2, 32, 32);
    VideoBuf v;
    v.frames = {frame, frame, frame};
    const auto e = embed_video(v);
    REQUIRE(e.values.size() == 128);
    CHECK(l2_norm(e.values) == doctest::Approx(1.0).epsilon(1e-6));
    const auto still = embed_image(frame);
    for (std::size_t i = 0; i < 64; ++i) CHECK(e.values[i] == doctest::Approx(still.values[i]).epsilon(1e-6));
    for (std::size_t i = 64; i < 128; ++i) CHECK(e.values[i] == 0.0f);
}

TEST_CASE("video: reversal and repetition leave the embedding unchanged") {
    auto v = mock_text_to_video("rolling hills", 4, 9, 32, 32);
    const auto forward = embed_video(v);
    CHECK(embed_video(v).values == forward.values);
    std::reverse(v.frames.begin(), v.frames.end());
    const auto backward = embed_video(v);
    for (std::size_t i = 0; i < 128; ++i) CHECK(backward.values[i] == doctest::Approx(forward.values[i]).epsilon(1e-6));
    VideoBuf one;
    one.frames = {v.frames[0]};
    CHECK_THROWS_AS(embed_video(one), Error);
}

TEST_CASE("every non-degenerate embedding is unit length and deterministic") {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 20; ++t) {
        const std::vector<Payload> payloads{
            testing::random_string(rng, "abc de", 20),
            testing::random_image(rng, 8 + rng() % 20, 8 + rng() % 20),
            mock_tts(testing::random_string(rng, "abcdefgh", 3)),
            mock_text_to_video(testing::random_string(rng, "xyz", 5), rng(), 3, 16, 16),
        };
        for (const auto& p : payloads) {
            const auto e = embed(p);
            CHECK(e.values.size() == embedding_dim(modality_of(p)));
            CHECK(embed(p).values == e.values);
            if (!e.degenerate) CHECK(l2_norm(e.values) == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("embedder refuses other modalities") {
    const Embedder text(Modality::Text);
    try {
        text(Payload{ImageBuf(8, 8)});
        FAIL("expected EmbedderModalityMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmbedderModalityMismatch);
    }
    CHECK(text(Payload{std::string("ok then")}).modality == Modality::Text);
}
