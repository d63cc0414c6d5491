#include "maid/modality.hpp"

#include <chrono>
#include <random>

#include <fmt/format.h>

namespace maid {

std::string_view to_string(Modality m) noexcept {
    switch (m) {
        case Modality::Text: return "text";
        case Modality::Image: return "image";
        case Modality::Audio: return "audio";
        case Modality::Video: return "video";
    }
    return "text";
}

std::optional<Modality> modality_from_string(std::string_view s) noexcept {
    if (s == "text") return Modality::Text;
    if (s == "image") return Modality::Image;
    if (s == "audio") return Modality::Audio;
    if (s == "video") return Modality::Video;
    return std::nullopt;
}

bool VideoBuf::valid() const noexcept {
    if (frames.empty()) return false;
    for (const auto& f : frames) {
        if (!f.valid() || f.width != frames.front().width || f.height != frames.front().height) return false;
    }
    return true;
}

Modality modality_of(const Payload& p) noexcept { return static_cast<Modality>(p.index()); }

ArtifactId ArtifactId::random() {
    thread_local std::mt19937_64 rng{std::random_device{}()};
    ArtifactId id;
    for (int half = 0; half < 2; ++half) {
        auto v = rng();
        for (int i = 0; i < 8; ++i) id.bytes[half * 8 + i] = static_cast<std::uint8_t>(v >> (8 * i));
    }
    return id;
}

std::optional<ArtifactId> ArtifactId::from_hex(std::string_view hex) {
    if (hex.size() != 32) return std::nullopt;
    ArtifactId id;
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        return -1;
    };
    for (std::size_t i = 0; i < 16; ++i) {
        int hi = nibble(hex[2 * i]), lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        id.bytes[i] = static_cast<std::uint8_t>(hi * 16 + lo);
    }
    return id;
}

std::string ArtifactId::hex() const {
    std::string out;
    out.reserve(32);
    for (auto b : bytes) out += fmt::format("{:02x}", b);
    return out;
}

Artifact make_artifact(Payload payload, std::vector<ArtifactId> parents, std::optional<std::string> stage_kind) {
    Artifact a;
    a.id = ArtifactId::random();
    a.modality = modality_of(payload);
    a.payload = std::move(payload);
    std::erase(parents, a.id);
    a.parent_ids = std::move(parents);
    a.created_at = now_utc_seconds();
    a.stage_kind = std::move(stage_kind);
    return a;
}

std::int64_t now_utc_seconds() {
    using namespace std::chrono;
    return duration_cast<seconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace maid
