#include "maid/char_lm.hpp"

#include <cctype>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "maid/codec.hpp"
#include "maid/error.hpp"

namespace maid {
namespace {

constexpr std::string_view kSymbols = "abcdefghijklmnopqrstuvwxyz0123456789 .,!?-'\";:()[]{}/\\&*+=#@$%_<";
static_assert(kSymbols.size() == CharLm::kVocabSize);

const std::array<int, 256>& index_table() {
    static const auto table = [] {
        std::array<int, 256> t{};
        t.fill(-1);
        for (std::size_t i = 0; i < kSymbols.size(); ++i) t[static_cast<unsigned char>(kSymbols[i])] = static_cast<int>(i);
        return t;
    }();
    return table;
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

const std::array<char, CharLm::kVocabSize>& CharLm::vocabulary() {
    static const auto vocab = [] {
        std::array<char, kVocabSize> v{};
        std::copy(kSymbols.begin(), kSymbols.end(), v.begin());
        return v;
    }();
    return vocab;
}

std::optional<std::size_t> CharLm::symbol_index(char c) noexcept {
    const int i = index_table()[static_cast<unsigned char>(c)];
    if (i < 0) return std::nullopt;
    return static_cast<std::size_t>(i);
}

std::string CharLm::normalize(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (unsigned char raw : text) {
        char c = static_cast<char>(std::tolower(raw));
        if (!symbol_index(c)) c = ' ';
        if (c == ' ' && !out.empty() && out.back() == ' ') continue;
        out.push_back(c);
    }
    return out;
}

CharLm::CharLm()
    : counts_(kVocabSize * kVocabSize * kVocabSize, 0), totals_(kVocabSize * kVocabSize, 0) {}

CharLm CharLm::train(std::string_view corpus) {
    const auto text = normalize(corpus);
    if (text.size() < kMinCorpus)
        throw Error(ErrorCode::CorpusTooSmall, fmt::format("{} symbols after normalization, need {}", text.size(), kMinCorpus));
    CharLm lm;
    const std::string padded = std::string(kOrder, kPad) + text;
    for (std::size_t i = kOrder; i < padded.size(); ++i) {
        const auto ctx = lm.context_key(std::string_view(padded).substr(i - kOrder, kOrder));
        ++lm.counts_[ctx * kVocabSize + *symbol_index(padded[i])];
        ++lm.totals_[ctx];
    }
    lm.trained_on_ = sha256_hex(as_bytes(text));
    return lm;
}

std::size_t CharLm::context_key(std::string_view context) const {
    // Left-pad short contexts and keep only the last kOrder symbols.
    std::size_t key = 0;
    for (std::size_t i = 0; i < kOrder; ++i) {
        const std::size_t back = kOrder - i;
        const char c = context.size() >= back ? context[context.size() - back] : kPad;
        const auto idx = symbol_index(c);
        key = key * kVocabSize + (idx ? *idx : *symbol_index(kPad));
    }
    return key;
}

std::uint32_t CharLm::count(std::string_view context, char next) const {
    const auto idx = symbol_index(next);
    if (!idx) return 0;
    return counts_[context_key(context) * kVocabSize + *idx];
}

std::uint32_t CharLm::context_total(std::string_view context) const { return totals_[context_key(context)]; }

double CharLm::probability(std::string_view context, char next) const {
    return (static_cast<double>(count(context, next)) + 1.0) /
           (static_cast<double>(context_total(context)) + static_cast<double>(kVocabSize));
}

double CharLm::logprob(std::string_view text) const {
    const auto norm = normalize(text);
    std::size_t key = context_key("");
    const std::size_t ring = kVocabSize;  // key = prev2 * 64 + prev1
    double total = 0.0;
    for (char c : norm) {
        const auto idx = *symbol_index(c);
        const double p = (static_cast<double>(counts_[key * kVocabSize + idx]) + 1.0) /
                         (static_cast<double>(totals_[key]) + static_cast<double>(kVocabSize));
        total += std::log(p);
        key = (key % ring) * kVocabSize + idx;
    }
    return total;
}

std::string CharLm::generate(std::string_view prompt, std::size_t n, std::uint64_t seed, double temperature) const {
    std::string out(prompt);
    std::string context = normalize(prompt);
    std::mt19937_64 rng(seed);
    std::array<double, kVocabSize> weights{};
    for (std::size_t step = 0; step < n; ++step) {
        const auto key = context_key(context);
        const auto* row = &counts_[key * kVocabSize];
        char chosen = kPad;
        if (temperature <= 0.0) {
            std::uint32_t best = 0;
            bool first = true;
            for (std::size_t i = 0; i < kVocabSize; ++i) {
                const char c = kSymbols[i];
                if (first || row[i] > best || (row[i] == best && c < chosen)) {
                    best = row[i];
                    chosen = c;
                    first = false;
                }
            }
        } else {
            double sum = 0.0;
            for (std::size_t i = 0; i < kVocabSize; ++i) {
                weights[i] = std::pow(static_cast<double>(row[i]) + 1.0, 1.0 / temperature);
                sum += weights[i];
            }
            double u = unit_uniform(rng) * sum;
            std::size_t pick = kVocabSize - 1;
            for (std::size_t i = 0; i < kVocabSize; ++i) {
                if (u < weights[i]) {
                    pick = i;
                    break;
                }
                u -= weights[i];
            }
            chosen = kSymbols[pick];
        }
        out.push_back(chosen);
        context.push_back(chosen);
        if (context.size() > kOrder) context.erase(0, context.size() - kOrder);
    }
    return out;
}

}  // namespace maid
