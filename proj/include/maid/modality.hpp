#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace maid {

enum class Modality : std::uint8_t { Text = 0, Image = 1, Audio = 2, Video = 3 };

std::string_view to_string(Modality m) noexcept;
/// Accepts the lowercase names ("text", "image", "audio", "video").
std::optional<Modality> modality_from_string(std::string_view s) noexcept;

struct ImageBuf {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<std::uint8_t> pixels;  // row-major RGB

    ImageBuf() = default;
    ImageBuf(std::uint32_t w, std::uint32_t h) : width(w), height(h), pixels(std::size_t{w} * h * 3, 0) {}

    std::uint8_t* at(std::uint32_t x, std::uint32_t y) { return &pixels[(std::size_t{y} * width + x) * 3]; }
    const std::uint8_t* at(std::uint32_t x, std::uint32_t y) const {
        return &pixels[(std::size_t{y} * width + x) * 3];
    }
    bool valid() const noexcept {
        return width > 0 && height > 0 && pixels.size() == std::size_t{width} * height * 3;
    }

    friend bool operator==(const ImageBuf&, const ImageBuf&) = default;
};

struct AudioBuf {
    static constexpr std::uint32_t kSampleRate = 16000;

    std::uint32_t sample_rate = kSampleRate;
    std::vector<std::int16_t> samples;

    friend bool operator==(const AudioBuf&, const AudioBuf&) = default;
};

struct VideoBuf {
    static constexpr std::uint8_t kFps = 8;

    std::vector<ImageBuf> frames;
    std::uint8_t fps = kFps;

    bool valid() const noexcept;

    friend bool operator==(const VideoBuf&, const VideoBuf&) = default;
};

using Payload = std::variant<std::string, ImageBuf, AudioBuf, VideoBuf>;

Modality modality_of(const Payload& p) noexcept;

struct ArtifactId {
    std::array<std::uint8_t, 16> bytes{};

    static ArtifactId random();
    static std::optional<ArtifactId> from_hex(std::string_view hex);
    std::string hex() const;

    friend auto operator<=>(const ArtifactId&, const ArtifactId&) = default;
};

/// A typed payload plus its provenance. Treated as an immutable value once
/// built; `make_artifact` is the only sanctioned constructor.
struct Artifact {
    ArtifactId id;
    Modality modality = Modality::Text;
    Payload payload;
    std::vector<ArtifactId> parent_ids;
    std::int64_t created_at = 0;  // UTC seconds
    std::optional<std::string> stage_kind;

    const std::string& text() const { return std::get<std::string>(payload); }
    const ImageBuf& image() const { return std::get<ImageBuf>(payload); }
    const AudioBuf& audio() const { return std::get<AudioBuf>(payload); }
    const VideoBuf& video() const { return std::get<VideoBuf>(payload); }
};

Artifact make_artifact(Payload payload, std::vector<ArtifactId> parents = {},
                       std::optional<std::string> stage_kind = std::nullopt);

std::int64_t now_utc_seconds();

}  // namespace maid
