#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace maid {

/// Order-2 character language model with add-one smoothing over a fixed
/// 64-symbol vocabulary. p(c | a b) = (n(ab, c) + 1) / (n(ab) + 64).
///
/// The first two positions of any text are conditioned on a left pad of
/// spaces, so every position has a full two-character context.
class CharLm {
public:
    static constexpr std::size_t kOrder = 2;
    static constexpr std::size_t kVocabSize = 64;
    static constexpr char kPad = ' ';
    static constexpr std::size_t kMinCorpus = 100;

    static const std::array<char, kVocabSize>& vocabulary();
    static std::optional<std::size_t> symbol_index(char c) noexcept;

    /// Lowercase, map out-of-vocabulary bytes to space, collapse space runs.
    static std::string normalize(std::string_view text);

    /// A model with no counts: every conditional is exactly 1/64.
    CharLm();

    /// Throws CorpusTooSmall when fewer than 100 symbols survive normalization.
    static CharLm train(std::string_view corpus);

    /// p(next | the two characters before it); `context` is padded on the left.
    double probability(std::string_view context, char next) const;
    std::uint32_t count(std::string_view context, char next) const;
    std::uint32_t context_total(std::string_view context) const;

    /// Sum of log conditionals over the normalized text.
    double logprob(std::string_view text) const;

    /// Appends `n` characters to `prompt`. temperature <= 0 is greedy argmax
    /// (ties go to the smaller byte); otherwise ancestral sampling from a
    /// seeded mt19937_64 stream with probabilities raised to 1/temperature.
    std::string generate(std::string_view prompt, std::size_t n, std::uint64_t seed, double temperature = 1.0) const;

    /// SHA-256 of the normalized training corpus; empty for the blank model.
    const std::string& trained_on() const noexcept { return trained_on_; }

private:
    std::size_t context_key(std::string_view context) const;

    std::vector<std::uint32_t> counts_;  // [context_key * 64 + next]
    std::vector<std::uint32_t> totals_;  // [context_key]
    std::string trained_on_;
};

}  // namespace maid
