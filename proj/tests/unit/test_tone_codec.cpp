#include <doctest.h>

#include <random>

#include "maid/error.hpp"
#include "maid/tone_codec.hpp"
#include "test_support.hpp"

using namespace maid;

TEST_CASE("round trip of a short phrase") {
    CHECK(mock_asr(mock_tts("hello world.")) == "hello world.");
}

TEST_CASE("two symbols take 3200 samples") {
    const auto audio = mock_tts("ab");
    CHECK(audio.samples.size() == 3200);
    CHECK(audio.sample_rate == 16000);
}

TEST_CASE("silent frame decodes to the first symbol") {
    AudioBuf silence;
    silence.samples.assign(1600, 0);
    CHECK(mock_asr(silence) == "a");
}

TEST_CASE("out-of-alphabet text maps to spaces, case folds") {
    CHECK(ToneCodec::to_alphabet("Hi~there") == "hi there");
    CHECK(mock_asr(mock_tts("Hi~there")) == "hi there");
}

TEST_CASE("frequencies land on integer bins of a 1600-point block") {
    for (std::size_t i = 0; i < 32; ++i) {
        const double bin = ToneCodec::frequency(i) * 1600.0 / 16000.0;
        CHECK(bin == static_cast<double>(static_cast<long>(bin)));
    }
}

TEST_CASE("length limits") {
    CHECK_NOTHROW(mock_tts(std::string(ToneCodec::kMaxSymbols, 'a')));
    try {
        mock_tts(std::string(ToneCodec::kMaxSymbols + 1, 'a'));
        FAIL("expected TextTooLong");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TextTooLong);
    }
    AudioBuf odd;
    odd.samples.assign(1601, 0);
    try {
        mock_asr(odd);
        FAIL("expected BadFrameLength");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadFrameLength);
    }
}

TEST_CASE("random strings round trip exactly") {
    std::mt19937_64 rng(77);
    for (int t = 0; t < 100; ++t) {
        const auto s = testing::random_string(rng, ToneCodec::kAlphabet, 1 + rng() % 200);
        CHECK(mock_asr(mock_tts(s)) == s);
    }
}

TEST_CASE("goertzel peaks at the tone it was given") {
    const auto audio = mock_tts("k");
    const auto k = *ToneCodec::symbol_index('k');
    const double on = goertzel_power(audio.samples.data(), 1600, ToneCodec::frequency(k), 16000.0);
    for (std::size_t i = 0; i < 32; ++i)
        if (i != k) CHECK(goertzel_power(audio.samples.data(), 1600, ToneCodec::frequency(i), 16000.0) < on * 1e-3);
}
