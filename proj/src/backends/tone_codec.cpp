#include "maid/tone_codec.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

#include <fmt/format.h>

#include "maid/error.hpp"

namespace maid {

std::optional<std::size_t> ToneCodec::symbol_index(char c) noexcept {
    const auto pos = kAlphabet.find(c);
    if (pos == std::string_view::npos) return std::nullopt;
    return pos;
}

std::string ToneCodec::to_alphabet(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (unsigned char raw : text) {
        if ((raw & 0xC0) == 0x80) continue;  // UTF-8 continuation byte
        const char c = static_cast<char>(std::tolower(raw));
        out.push_back(symbol_index(c) ? c : ' ');
    }
    return out;
}

namespace {

/// One symbol's samples; every occurrence of a symbol is the same block.
const std::vector<std::int16_t>& symbol_waveform(std::size_t symbol) {
    static const auto table = [] {
        std::array<std::vector<std::int16_t>, ToneCodec::kAlphabet.size()> t;
        const double amplitude = ToneCodec::kAmplitude * 32767.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double step = 2.0 * std::numbers::pi * ToneCodec::frequency(i) / AudioBuf::kSampleRate;
            t[i].resize(ToneCodec::kSamplesPerSymbol);
            for (std::size_t n = 0; n < ToneCodec::kSamplesPerSymbol; ++n)
                t[i][n] = static_cast<std::int16_t>(std::lround(amplitude * std::sin(step * static_cast<double>(n))));
        }
        return t;
    }();
    return table[symbol];
}

}  // namespace

AudioBuf mock_tts(std::string_view text, const ToneCodec& codec) {
    const auto symbols = codec.to_alphabet(text);
    if (symbols.size() > ToneCodec::kMaxSymbols)
        throw Error(ErrorCode::TextTooLong, fmt::format("{} symbols, limit {}", symbols.size(), ToneCodec::kMaxSymbols));
    AudioBuf audio;
    audio.samples.reserve(symbols.size() * ToneCodec::kSamplesPerSymbol);
    for (char c : symbols) {
        const auto& wave = symbol_waveform(*codec.symbol_index(c));
        audio.samples.insert(audio.samples.end(), wave.begin(), wave.end());
    }
    return audio;
}

double goertzel_power(const std::int16_t* block, std::size_t n, double frequency, double sample_rate) {
    const double coeff = 2.0 * std::cos(2.0 * std::numbers::pi * frequency / sample_rate);
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double s0 = block[i] + coeff * s1 - s2;
        s2 = s1;
        s1 = s0;
    }
    return s1 * s1 + s2 * s2 - coeff * s1 * s2;
}

__attribute__((target_clones("avx512f", "avx2", "default")))
void goertzel_bank(const std::int16_t* block, std::size_t n, std::span<const double> frequencies, double sample_rate,
                   std::span<double> power) {
    constexpr std::size_t kLanes = 32;
    for (std::size_t base = 0; base < frequencies.size(); base += kLanes) {
        const std::size_t lanes = std::min(kLanes, frequencies.size() - base);
        double coeff[kLanes] = {}, s1[kLanes] = {}, s2[kLanes] = {};
        for (std::size_t j = 0; j < lanes; ++j)
            coeff[j] = 2.0 * std::cos(2.0 * std::numbers::pi * frequencies[base + j] / sample_rate);
        // Lanes are independent, so the inner loop vectorizes across bins.
        for (std::size_t i = 0; i < n; ++i) {
            const double x = block[i];
            for (std::size_t j = 0; j < kLanes; ++j) {
                const double s0 = x + coeff[j] * s1[j] - s2[j];
                s2[j] = s1[j];
                s1[j] = s0;
            }
        }
        for (std::size_t j = 0; j < lanes; ++j)
            power[base + j] = s1[j] * s1[j] + s2[j] * s2[j] - coeff[j] * s1[j] * s2[j];
    }
}

std::string mock_asr(const AudioBuf& audio, const ToneCodec& codec) {
    (void)codec;
    const std::size_t block = ToneCodec::kSamplesPerSymbol;
    if (audio.samples.size() % block != 0)
        throw Error(ErrorCode::BadFrameLength, fmt::format("{} samples is not a multiple of {}", audio.samples.size(), block));
    std::string out;
    out.reserve(audio.samples.size() / block);
    std::array<double, ToneCodec::kAlphabet.size()> freqs{}, power{};
    for (std::size_t i = 0; i < freqs.size(); ++i) freqs[i] = ToneCodec::frequency(i);
    for (std::size_t start = 0; start < audio.samples.size(); start += block) {
        goertzel_bank(&audio.samples[start], block, freqs, AudioBuf::kSampleRate, power);
        // First maximum wins, as in a sequential scan.
        const auto best = static_cast<std::size_t>(std::max_element(power.begin(), power.end()) - power.begin());
        out.push_back(ToneCodec::kAlphabet[best]);
    }
    return out;
}

}  // namespace maid
