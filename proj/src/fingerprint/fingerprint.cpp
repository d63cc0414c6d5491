#include "maid/fingerprint.hpp"

#include <cmath>
#include <mutex>
#include <unordered_map>

#include <fftw3.h>
#include <fmt/format.h>

#include "maid/error.hpp"

namespace maid {
namespace {

constexpr int kGrid = 8;
constexpr std::size_t kFrame = 1024;
constexpr std::size_t kHop = 512;
constexpr std::size_t kBands = 32;
constexpr double kDegenerateNorm = 1e-9;

Embedding finish(Modality m, std::vector<double> v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    Embedding e;
    e.modality = m;
    e.values.assign(v.size(), 0.0f);
    if (norm < kDegenerateNorm) {
        e.degenerate = true;
        return e;
    }
    for (std::size_t i = 0; i < v.size(); ++i) e.values[i] = static_cast<float>(v[i] / norm);
    return e;
}

void center(std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    for (double& x : v) x -= mean;
}

double luma(const std::uint8_t* px) { return 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]; }

/// 64 centered cell means over a luma field (row-major cells, y outer).
std::vector<double> cell_means(const std::vector<double>& field, std::uint32_t w, std::uint32_t h) {
    std::vector<double> cells(kGrid * kGrid, 0.0);
    for (int j = 0; j < kGrid; ++j) {
        const std::uint32_t y0 = j * h / kGrid, y1 = (j + 1) * h / kGrid;
        for (int i = 0; i < kGrid; ++i) {
            const std::uint32_t x0 = i * w / kGrid, x1 = (i + 1) * w / kGrid;
            double sum = 0.0;
            for (std::uint32_t y = y0; y < y1; ++y)
                for (std::uint32_t x = x0; x < x1; ++x) sum += field[std::size_t{y} * w + x];
            cells[j * kGrid + i] = sum / static_cast<double>((x1 - x0) * (y1 - y0));
        }
    }
    center(cells);
    return cells;
}

std::vector<double> luma_field(const ImageBuf& img) {
    std::vector<double> field(std::size_t{img.width} * img.height);
    for (std::size_t p = 0; p < field.size(); ++p) field[p] = luma(&img.pixels[p * 3]);
    return field;
}

std::vector<double> unit(std::vector<double> v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < kDegenerateNorm) return std::vector<double>(v.size(), 0.0);
    for (double& x : v) x /= norm;
    return v;
}

}  // namespace

std::string normalize_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

std::uint32_t fnv1a32(std::string_view bytes) noexcept {
    std::uint32_t h = 2166136261u;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 16777619u;
    }
    return h;
}

Embedding embed_text(std::string_view text) {
    const auto norm = normalize_text(text);
    if (norm.empty()) throw Error(ErrorCode::EmptyContent, "text is empty after normalization");
    std::unordered_map<std::string_view, int> tf;
    const std::string_view view(norm);
    for (std::size_t i = 0; i + 3 <= view.size(); ++i) ++tf[view.substr(i, 3)];
    std::vector<double> v(embedding_dim(Modality::Text), 0.0);
    for (const auto& [gram, count] : tf) v[fnv1a32(gram) % v.size()] += 1.0 + std::log(static_cast<double>(count));
    return finish(Modality::Text, std::move(v));
}

Embedding embed_image(const ImageBuf& img) {
    if (img.width < kGrid || img.height < kGrid)
        throw Error(ErrorCode::TooSmall, fmt::format("{}x{} image, need at least 8x8", img.width, img.height));
    return finish(Modality::Image, cell_means(luma_field(img), img.width, img.height));
}

namespace dsp {

void fft(std::span<std::complex<double>> data) {
    // Planning is not thread-safe; executing a cached plan on new arrays is.
    static std::mutex plan_mutex;
    static std::unordered_map<std::size_t, fftw_plan> plans;
    const std::size_t n = data.size();
    if (n == 0) return;
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard lock(plan_mutex);
        auto& slot = plans[n];
        if (!slot) slot = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        plan = slot;
    }
    fftw_execute_dft(plan, buf, buf);
}

std::vector<double> band_features(std::span<const double> frame) {
    std::vector<std::complex<double>> spec(frame.begin(), frame.end());
    fft(spec);
    constexpr std::size_t per_band = (kFrame / 2) / kBands;
    std::vector<double> bands(kBands, 0.0);
    for (std::size_t b = 0; b < kBands; ++b) {
        double sum = 0.0;
        for (std::size_t bin = 1 + b * per_band; bin <= (b + 1) * per_band; ++bin) sum += std::abs(spec[bin]);
        bands[b] = std::log1p(sum);
    }
    return bands;
}

}  // namespace dsp

Embedding embed_audio(const AudioBuf& audio) {
    if (audio.samples.size() < kFrame)
        throw Error(ErrorCode::TooShort, fmt::format("{} samples, need at least {}", audio.samples.size(), kFrame));
    const std::size_t frames = (audio.samples.size() - kFrame) / kHop + 1;
    std::vector<double> per_frame(frames * kBands);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t f = 0; f < static_cast<std::ptrdiff_t>(frames); ++f) {
        std::vector<double> frame(kFrame);
        for (std::size_t i = 0; i < kFrame; ++i) frame[i] = audio.samples[f * kHop + i] / 32768.0;
        const auto bands = dsp::band_features(frame);
        std::copy(bands.begin(), bands.end(), per_frame.begin() + f * kBands);
    }

    std::vector<double> mean(kBands, 0.0);
    for (std::size_t f = 0; f < frames; ++f)
        for (std::size_t b = 0; b < kBands; ++b) mean[b] += per_frame[f * kBands + b];
    for (double& m : mean) m /= static_cast<double>(frames);
    center(mean);
    return finish(Modality::Audio, std::move(mean));
}

Embedding embed_video(const VideoBuf& video) {
    if (video.frames.size() < 2) throw Error(ErrorCode::TooFewFrames, "video embedding needs at least 2 frames");
    if (!video.valid()) throw Error(ErrorCode::BadDimensions, "frames differ in size");
    const auto w = video.frames.front().width, h = video.frames.front().height;
    if (w < kGrid || h < kGrid) throw Error(ErrorCode::TooSmall, "frames smaller than 8x8");
    const std::size_t n = video.frames.size();

    std::vector<std::vector<double>> descriptors(n);
    for (std::size_t k = 0; k < n; ++k) {
        auto e = embed_image(video.frames[k]);
        descriptors[k].assign(e.values.begin(), e.values.end());
    }
    // Sum frames pairwise from both ends so reversing the video reproduces
    // the static half bit for bit.
    std::vector<double> static_half(kGrid * kGrid, 0.0);
    for (std::size_t k = 0; k < (n + 1) / 2; ++k) {
        const auto& a = descriptors[k];
        const auto& b = descriptors[n - 1 - k];
        for (std::size_t d = 0; d < static_half.size(); ++d) static_half[d] += (k == n - 1 - k) ? a[d] : a[d] + b[d];
    }
    for (double& x : static_half) x /= static_cast<double>(n);

    // Integer accumulation of |delta| is order independent.
    const std::size_t values = std::size_t{w} * h * 3;
    std::vector<std::uint64_t> delta(values, 0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const auto& a = video.frames[k].pixels;
        const auto& b = video.frames[k + 1].pixels;
        for (std::size_t i = 0; i < values; ++i) delta[i] += static_cast<std::uint64_t>(std::abs(int{a[i]} - int{b[i]}));
    }
    std::vector<double> motion_field(std::size_t{w} * h);
    const double pairs = static_cast<double>(n - 1);
    for (std::size_t p = 0; p < motion_field.size(); ++p)
        motion_field[p] = (0.299 * delta[3 * p] + 0.587 * delta[3 * p + 1] + 0.114 * delta[3 * p + 2]) / pairs;
    auto motion_half = cell_means(motion_field, w, h);

    auto combined = unit(std::move(static_half));
    auto motion_unit = unit(std::move(motion_half));
    combined.insert(combined.end(), motion_unit.begin(), motion_unit.end());
    return finish(Modality::Video, std::move(combined));
}

Embedding embed(const Payload& payload) {
    return std::visit(
        [](const auto& p) -> Embedding {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, std::string>) return embed_text(p);
            else if constexpr (std::is_same_v<T, ImageBuf>) return embed_image(p);
            else if constexpr (std::is_same_v<T, AudioBuf>) return embed_audio(p);
            else return embed_video(p);
        },
        payload);
}

Embedding Embedder::operator()(const Payload& payload) const {
    if (modality_of(payload) != modality_)
        throw Error(ErrorCode::EmbedderModalityMismatch,
                    fmt::format("{} embedder given {} payload", to_string(modality_), to_string(modality_of(payload))));
    return embed(payload);
}

double l2_norm(std::span<const float> v) {
    double s = 0.0;
    for (float x : v) s += double{x} * x;
    return std::sqrt(s);
}

double cosine(const Embedding& a, const Embedding& b) {
    if (a.degenerate || b.degenerate || a.values.size() != b.values.size()) return 0.0;
    double dot = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) dot += double{a.values[i]} * b.values[i];
    return dot;
}

}  // namespace maid
