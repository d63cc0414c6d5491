#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "maid/modality.hpp"

namespace maid {

/// Invertible stand-in for speech synthesis/recognition: every symbol of a
/// 32-letter alphabet is a 0.1 s sine at 400 + 50*i Hz. At 16 kHz each
/// frequency lands exactly on a 1600-point DFT bin, so recognition is exact.
struct ToneCodec {
    static constexpr std::string_view kAlphabet = "abcdefghijklmnopqrstuvwxyz .,!?-";
    static constexpr std::size_t kSamplesPerSymbol = 1600;
    static constexpr std::size_t kMaxSymbols = 4096;
    static constexpr double kAmplitude = 0.5;

    static double frequency(std::size_t symbol) noexcept { return 400.0 + 50.0 * static_cast<double>(symbol); }
    static std::optional<std::size_t> symbol_index(char c) noexcept;

    /// Lowercases and maps every other code point to a space.
    static std::string to_alphabet(std::string_view text);
};

static_assert(ToneCodec::kAlphabet.size() == 32);

/// Throws TextTooLong above 4096 symbols.
AudioBuf mock_tts(std::string_view text, const ToneCodec& codec = {});
/// Throws BadFrameLength unless the sample count is a multiple of 1600.
std::string mock_asr(const AudioBuf& audio, const ToneCodec& codec = {});

/// Goertzel power of one block at the given frequency (Hz).
double goertzel_power(const std::int16_t* block, std::size_t n, double frequency, double sample_rate);
/// goertzel_power for many frequencies in one pass over the block.
void goertzel_bank(const std::int16_t* block, std::size_t n, std::span<const double> frequencies, double sample_rate,
                   std::span<double> power);

}  // namespace maid
