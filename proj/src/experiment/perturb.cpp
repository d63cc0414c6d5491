#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "maid/experiment.hpp"
#include "maid/mock_media.hpp"

namespace maid::perturb {
namespace {

// Uniform in [0, n); modulo keeps results identical across standard libraries.
std::size_t pick(Rng& rng, std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(rng() % n); }

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::size_t> choose_distinct(Rng& rng, std::size_t n, std::size_t r) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < r && i < n; ++i) std::swap(idx[i], idx[i + pick(rng, n - i)]);
    idx.resize(std::min(r, n));
    return idx;
}

}  // namespace

Rect random_rect(std::uint32_t width, std::uint32_t height, double area_fraction, Rng& rng) {
    const double target = std::max(1.0, area_fraction * width * height);
    const auto lo = static_cast<std::uint32_t>(std::clamp(std::ceil(target / height), 1.0, double(width)));
    const auto hi = static_cast<std::uint32_t>(std::clamp(std::floor(target), double(lo), double(width)));
    Rect r;
    r.w = lo + static_cast<std::uint32_t>(pick(rng, hi - lo + 1));
    r.h = static_cast<std::uint32_t>(std::clamp(std::lround(target / r.w), 1L, static_cast<long>(height)));
    r.x = static_cast<std::uint32_t>(pick(rng, width - r.w + 1));
    r.y = static_cast<std::uint32_t>(pick(rng, height - r.h + 1));
    return r;
}

ImageBuf mask_region(const ImageBuf& img, Rng& rng, double area_fraction) {
    ImageBuf out = img;
    const auto r = random_rect(img.width, img.height, area_fraction, rng);
    for (std::uint32_t y = r.y; y < r.y + r.h; ++y)
        std::fill_n(out.pixels.begin() + (static_cast<std::size_t>(y) * img.width + r.x) * 3, std::size_t{r.w} * 3, 0);
    return out;
}

ImageBuf add_content(const ImageBuf& img, Rng& rng, double area_fraction) {
    ImageBuf out = img;
    const auto r = random_rect(img.width, img.height, area_fraction, rng);
    const auto seed = rng();
    const auto source = mock_text_to_image(fmt::format("new content {}", seed), seed, img.width, img.height);
    for (std::uint32_t y = r.y; y < r.y + r.h; ++y) {
        const auto off = (static_cast<std::size_t>(y) * img.width + r.x) * 3;
        std::copy_n(source.pixels.begin() + off, std::size_t{r.w} * 3, out.pixels.begin() + off);
    }
    return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!is_terminator(text[i])) continue;
        if (i + 1 < text.size() && !std::isspace(static_cast<unsigned char>(text[i + 1]))) continue;
        if (auto s = trim(text.substr(start, i + 1 - start)); !s.empty()) out.push_back(std::move(s));
        start = i + 1;
    }
    if (auto s = trim(text.substr(start)); !s.empty()) out.push_back(std::move(s));
    return out;
}

std::string join_sentences(const std::vector<std::string>& sentences) { return fmt::format("{}", fmt::join(sentences, " ")); }

std::string delete_sentences(std::string_view text, Rng& rng, double fraction) {
    auto s = split_sentences(text);
    const std::size_t n = s.size();
    if (n < 2) return std::string(text);
    auto r = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n)));
    r = std::clamp<std::size_t>(r, 1, n - 1);
    auto drop = choose_distinct(rng, n, r);
    std::sort(drop.begin(), drop.end());
    std::vector<std::string> kept;
    for (std::size_t i = 0, d = 0; i < n; ++i) {
        if (d < drop.size() && drop[d] == i) {
            ++d;
            continue;
        }
        kept.push_back(std::move(s[i]));
    }
    return join_sentences(kept);
}

std::string insert_sentences(std::string_view text, Rng& rng, const std::vector<std::string>& pool, std::size_t count) {
    auto s = split_sentences(text);
    if (pool.empty()) return std::string(text);
    for (std::size_t i = 0; i < count; ++i) {
        const auto& foreign = pool[pick(rng, pool.size())];
        s.insert(s.begin() + static_cast<std::ptrdiff_t>(pick(rng, s.size() + 1)), foreign);
    }
    return join_sentences(s);
}

std::string shuffle_sentences(std::string_view text, Rng& rng) {
    auto s = split_sentences(text);
    const std::size_t n = s.size();
    if (n < 2) return std::string(text);
    const auto original = s;
    for (std::size_t i = n - 1; i > 0; --i) std::swap(s[i], s[pick(rng, i + 1)]);
    if (s == original) std::rotate(s.begin(), s.begin() + 1, s.end());
    return join_sentences(s);
}

std::string substitute_words(std::string_view text, Rng& rng, const Lexicon& lexicon, double fraction) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        const auto b = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > b) words.emplace_back(text.substr(b, i - b));
    }
    if (words.empty() || lexicon.size() == 0) return std::string(text);
    auto r = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(words.size())));
    r = std::max<std::size_t>(r, 1);
    for (auto w : choose_distinct(rng, words.size(), r)) words[w] = lexicon.entries()[pick(rng, lexicon.size())].first;
    return fmt::format("{}", fmt::join(words, " "));
}

}  // namespace maid::perturb
