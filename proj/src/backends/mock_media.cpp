#include "maid/mock_media.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <fmt/format.h>
#include <openssl/sha.h>

#include "maid/error.hpp"
#include "maid/fingerprint.hpp"

namespace maid {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kWaves = 3;
constexpr double kMaxFrequency = 4.0;
constexpr double kGain = 1.5;

struct Wave {
    double fx, fy;   // cycles across the image
    double phase;    // radians
    double speed;    // radians per second, for video drift
};

// The waves are shared by all channels so the structure survives the
// conversion to luma; each channel only shifts their phases.
struct Field {
    std::array<Wave, kWaves> waves;
    std::array<double, 3> channel_offset;
};

Field field_from(std::string_view prompt, std::uint64_t seed) {
    std::string input(prompt);
    for (int i = 0; i < 8; ++i) input.push_back(static_cast<char>((seed >> (8 * i)) & 0xFF));
    std::array<std::uint8_t, SHA256_DIGEST_LENGTH> d{};
    SHA256(reinterpret_cast<const unsigned char*>(input.data()), input.size(), d.data());
    // 3 waves x 4 parameters + 3 channel offsets = 15 of the 32 digest bytes.
    Field f{};
    std::size_t b = 0;
    for (auto& w : f.waves) {
        w.fx = d[b++] / 255.0 * 2.0 * kMaxFrequency - kMaxFrequency;
        w.fy = d[b++] / 255.0 * 2.0 * kMaxFrequency - kMaxFrequency;
        w.phase = d[b++] / 256.0 * kTwoPi;
        w.speed = (0.25 + d[b++] / 255.0) * kTwoPi;
    }
    for (auto& o : f.channel_offset) o = (d[b++] / 255.0 - 0.5) * 1.2;
    return f;
}

ImageBuf render(const Field& f, std::uint32_t width, std::uint32_t height, double t) {
    ImageBuf img(width, height);
    const double scale = kGain / std::sqrt(static_cast<double>(kWaves));
    for (std::uint32_t y = 0; y < height; ++y) {
        const double v = static_cast<double>(y) / height;
        for (std::uint32_t x = 0; x < width; ++x) {
            const double u = static_cast<double>(x) / width;
            std::array<double, kWaves> arg{};
            for (int k = 0; k < kWaves; ++k) {
                const auto& w = f.waves[k];
                arg[k] = kTwoPi * (w.fx * u + w.fy * v) + w.phase + w.speed * t;
            }
            auto* px = img.at(x, y);
            for (int c = 0; c < 3; ++c) {
                double s = 0.0;
                for (double a : arg) s += std::sin(a + f.channel_offset[c]);
                px[c] = static_cast<std::uint8_t>(std::lround(127.5 + 127.5 * std::clamp(scale * s, -1.0, 1.0)));
            }
        }
    }
    return img;
}

void check_side(std::uint32_t side) {
    if (side < 8 || side > 1024) throw Error(ErrorCode::BadDimensions, fmt::format("side {} outside [8, 1024]", side));
}

struct ChannelStats {
    std::array<double, 3> mean{};
    std::array<double, 3> stddev{};
};

ChannelStats stats(const ImageBuf& img) {
    ChannelStats s;
    const double n = static_cast<double>(img.width) * img.height;
    for (std::size_t i = 0; i < img.pixels.size(); ++i) s.mean[i % 3] += img.pixels[i];
    for (auto& m : s.mean) m /= n;
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const double d = img.pixels[i] - s.mean[i % 3];
        s.stddev[i % 3] += d * d;
    }
    for (auto& v : s.stddev) v = std::sqrt(v / n);
    return s;
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))); }

}  // namespace

ImageBuf mock_text_to_image(std::string_view prompt, std::uint64_t seed, std::uint32_t width, std::uint32_t height) {
    check_side(width);
    check_side(height);
    return render(field_from(prompt, seed), width, height, 0.0);
}

VideoBuf mock_text_to_video(std::string_view prompt, std::uint64_t seed, std::uint32_t frames, std::uint32_t width,
                            std::uint32_t height) {
    if (frames < 2 || frames > 256) throw Error(ErrorCode::BadFrameCount, fmt::format("{} frames outside [2, 256]", frames));
    check_side(width);
    check_side(height);
    const auto field = field_from(prompt, seed);
    VideoBuf video;
    video.frames.reserve(frames);
    for (std::uint32_t k = 0; k < frames; ++k)
        video.frames.push_back(render(field, width, height, static_cast<double>(k) / VideoBuf::kFps));
    return video;
}

ImageBuf mock_style_transfer(const ImageBuf& content, const ImageBuf& style, double strength) {
    constexpr double eps = 1e-6;
    const auto c = stats(content);
    const auto s = stats(style);
    ImageBuf out = content;
    for (std::size_t i = 0; i < content.pixels.size(); ++i) {
        const std::size_t ch = i % 3;
        const double in = content.pixels[i];
        const double matched = (in - c.mean[ch]) * (s.stddev[ch] / std::max(c.stddev[ch], eps)) + s.mean[ch];
        out.pixels[i] = to_byte(matched * strength + in * (1.0 - strength));
    }
    return out;
}

ImageBuf mock_image_edit(const ImageBuf& img, double strength) {
    const auto s = stats(img);
    ImageBuf out = img;
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const std::size_t ch = i % 3;
        out.pixels[i] = to_byte(s.mean[ch] + (img.pixels[i] - s.mean[ch]) * (1.0 + strength));
    }
    return out;
}

std::string mock_image_to_text(const ImageBuf& img) {
    const auto s = stats(img);
    // Tie order R > G > B: a later channel must be strictly larger to win.
    std::size_t dominant = 0;
    for (std::size_t ch = 1; ch < 3; ++ch)
        if (s.mean[ch] > s.mean[dominant]) dominant = ch;
    static constexpr std::array<std::string_view, 3> colors = {"red", "green", "blue"};

    const double luma_mean = 0.299 * s.mean[0] + 0.587 * s.mean[1] + 0.114 * s.mean[2];
    const std::string_view brightness = luma_mean < 85.0 ? "dark" : luma_mean < 170.0 ? "medium" : "bright";

    double gradient = 0.0;
    std::size_t pairs = 0;
    for (std::uint32_t y = 0; y < img.height; ++y) {
        for (std::uint32_t x = 0; x + 1 < img.width; ++x) {
            const auto* a = img.at(x, y);
            const auto* b = img.at(x + 1, y);
            const double la = 0.299 * a[0] + 0.587 * a[1] + 0.114 * a[2];
            const double lb = 0.299 * b[0] + 0.587 * b[1] + 0.114 * b[2];
            gradient += std::abs(lb - la);
            ++pairs;
        }
    }
    if (pairs > 0) gradient /= static_cast<double>(pairs);
    const std::string_view texture = gradient >= 10.0 ? "textured" : "flat";
    return fmt::format("a {} {} {} scene", brightness, colors[dominant], texture);
}

std::size_t medoid_frame(const VideoBuf& video) {
    std::vector<Embedding> e;
    e.reserve(video.frames.size());
    for (const auto& f : video.frames) e.push_back(embed_image(f));
    std::size_t best = 0;
    double best_sum = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < e.size(); ++j) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < e[i].values.size(); ++k) {
                const double d = double{e[i].values[k]} - e[j].values[k];
                d2 += d * d;
            }
            sum += std::sqrt(d2);
        }
        if (i == 0 || sum < best_sum) {
            best = i;
            best_sum = sum;
        }
    }
    return best;
}

std::string mock_video_summary(const VideoBuf& video) {
    if (!video.valid()) throw Error(ErrorCode::BadDimensions, "invalid video");
    return "summary: " + mock_image_to_text(video.frames[medoid_frame(video)]);
}

}  // namespace maid
