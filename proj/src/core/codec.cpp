#include "maid/codec.hpp"

#include <cctype>
#include <cstring>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <openssl/sha.h>

#include "maid/error.hpp"

namespace maid {
namespace {

struct PpmReader {
    ByteView bytes;
    std::size_t pos = 0;

    void skip_space_and_comments() {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    }

    std::uint32_t number(const char* what) {
        skip_space_and_comments();
        std::uint64_t v = 0;
        std::size_t start = pos;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos] - '0');
            if (v > 0xFFFFFFFFull) throw Error(ErrorCode::BadHeader, fmt::format("{} out of range", what));
            ++pos;
        }
        if (pos == start) throw Error(ErrorCode::BadHeader, fmt::format("missing {}", what));
        return static_cast<std::uint32_t>(v);
    }
};

ImageBuf parse_ppm_prefix(ByteView bytes, std::size_t& consumed) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw Error(ErrorCode::BadMagic, "expected P6");
    PpmReader r{bytes, 2};
    if (r.pos < bytes.size() && !std::isspace(bytes[r.pos]) && bytes[r.pos] != '#')
        throw Error(ErrorCode::BadMagic, "expected whitespace after P6");
    const auto w = r.number("width");
    const auto h = r.number("height");
    const auto maxval = r.number("maxval");
    if (w == 0 || h == 0) throw Error(ErrorCode::BadHeader, "zero dimension");
    if (maxval != 255) throw Error(ErrorCode::BadHeader, fmt::format("maxval {} unsupported", maxval));
    // Exactly one whitespace byte separates the header from the raster.
    if (r.pos >= bytes.size() || !std::isspace(bytes[r.pos])) throw Error(ErrorCode::BadHeader, "missing raster separator");
    ++r.pos;
    const std::size_t need = std::size_t{w} * h * 3;
    if (bytes.size() - r.pos < need)
        throw Error(ErrorCode::TruncatedPayload, fmt::format("need {} raster bytes, have {}", need, bytes.size() - r.pos));
    ImageBuf img;
    img.width = w;
    img.height = h;
    img.pixels.assign(bytes.begin() + r.pos, bytes.begin() + r.pos + need);
    consumed = r.pos + need;
    return img;
}

void put_u16(Bytes& out, std::uint16_t v) {
    out.push_back(v & 0xFF);
    out.push_back(v >> 8);
}
void put_u32(Bytes& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}
std::uint16_t get_u16(ByteView b, std::size_t at) { return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8)); }
std::uint32_t get_u32(ByteView b, std::size_t at) {
    return std::uint32_t{b[at]} | (std::uint32_t{b[at + 1]} << 8) | (std::uint32_t{b[at + 2]} << 16) |
           (std::uint32_t{b[at + 3]} << 24);
}
void append(Bytes& out, std::string_view s) { out.insert(out.end(), s.begin(), s.end()); }

}  // namespace

ImageBuf parse_image_ppm(ByteView bytes) {
    std::size_t consumed = 0;
    return parse_ppm_prefix(bytes, consumed);
}

Bytes write_image_ppm(const ImageBuf& img) {
    const auto header = fmt::format("P6\n{} {}\n255\n", img.width, img.height);
    Bytes out;
    out.reserve(header.size() + img.pixels.size());
    append(out, header);
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

AudioBuf parse_wav(ByteView bytes) {
    if (bytes.size() < 12) throw Error(ErrorCode::Truncated, "shorter than RIFF header");
    if (std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw Error(ErrorCode::UnsupportedFormat, "not a RIFF/WAVE file");
    bool have_fmt = false;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const auto id = std::string_view(reinterpret_cast<const char*>(bytes.data() + pos), 4);
        const auto size = get_u32(bytes, pos + 4);
        const std::size_t body = pos + 8;
        if (bytes.size() - body < size) throw Error(ErrorCode::Truncated, fmt::format("chunk '{}' truncated", id));
        if (id == "fmt ") {
            if (size < 16) throw Error(ErrorCode::Truncated, "fmt chunk too short");
            const auto format = get_u16(bytes, body);
            const auto channels = get_u16(bytes, body + 2);
            const auto rate = get_u32(bytes, body + 4);
            const auto bits = get_u16(bytes, body + 14);
            if (format != 1 || channels != 1 || rate != AudioBuf::kSampleRate || bits != 16)
                throw Error(ErrorCode::UnsupportedFormat,
                            fmt::format("format {} channels {} rate {} bits {}", format, channels, rate, bits));
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt) throw Error(ErrorCode::UnsupportedFormat, "data chunk before fmt chunk");
            if (size % 2 != 0) throw Error(ErrorCode::Truncated, "odd data chunk size");
            AudioBuf audio;
            audio.samples.resize(size / 2);
            for (std::size_t i = 0; i < audio.samples.size(); ++i)
                audio.samples[i] = static_cast<std::int16_t>(get_u16(bytes, body + 2 * i));
            return audio;
        }
        pos = body + size + (size & 1);
    }
    throw Error(ErrorCode::Truncated, have_fmt ? "missing data chunk" : "missing fmt chunk");
}

Bytes write_wav(const AudioBuf& audio) {
    const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
    Bytes out;
    out.reserve(44 + data_bytes);
    append(out, "RIFF");
    put_u32(out, 36 + data_bytes);
    append(out, "WAVEfmt ");
    put_u32(out, 16);
    put_u16(out, 1);
    put_u16(out, 1);
    put_u32(out, AudioBuf::kSampleRate);
    put_u32(out, AudioBuf::kSampleRate * 2);
    put_u16(out, 2);
    put_u16(out, 16);
    append(out, "data");
    put_u32(out, data_bytes);
    for (auto s : audio.samples) put_u16(out, static_cast<std::uint16_t>(s));
    return out;
}

VideoBuf parse_video_archive(ByteView bytes) {
    VideoBuf video;
    std::size_t pos = 0;
    while (bytes.size() - pos > 1) {
        std::size_t used = 0;
        video.frames.push_back(parse_ppm_prefix(bytes.subspan(pos), used));
        pos += used;
    }
    if (pos == bytes.size()) throw Error(ErrorCode::TruncatedPayload, "missing fps byte");
    video.fps = bytes[pos];
    if (!video.valid()) throw Error(ErrorCode::BadHeader, "empty video or mismatched frame sizes");
    return video;
}

Bytes write_video_archive(const VideoBuf& video) {
    Bytes out;
    for (const auto& f : video.frames) {
        auto ppm = write_image_ppm(f);
        out.insert(out.end(), ppm.begin(), ppm.end());
    }
    out.push_back(video.fps);
    return out;
}

void write_video_dir(const VideoBuf& video, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < video.frames.size(); ++i)
        write_file(dir / fmt::format("frame_{:05d}.ppm", i), write_image_ppm(video.frames[i]));
    nlohmann::json meta = {{"fps", video.fps}, {"frame_count", video.frames.size()}};
    const auto text = meta.dump();
    write_file(dir / "meta.json", as_bytes(text));
}

VideoBuf read_video_dir(const std::filesystem::path& dir) {
    const auto meta_bytes = read_file(dir / "meta.json");
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(meta_bytes.begin(), meta_bytes.end());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BadHeader, fmt::format("meta.json: {}", e.what()));
    }
    if (!meta.contains("fps") || !meta.contains("frame_count") || !meta["fps"].is_number_unsigned() ||
        !meta["frame_count"].is_number_unsigned())
        throw Error(ErrorCode::BadHeader, "meta.json needs unsigned fps and frame_count");
    VideoBuf video;
    video.fps = meta["fps"].get<std::uint8_t>();
    const auto count = meta["frame_count"].get<std::size_t>();
    for (std::size_t i = 0; i < count; ++i)
        video.frames.push_back(parse_image_ppm(read_file(dir / fmt::format("frame_{:05d}.ppm", i))));
    if (!video.valid()) throw Error(ErrorCode::BadHeader, "empty video or mismatched frame sizes");
    return video;
}

Bytes canonical_bytes(const Payload& payload) {
    return std::visit(
        [](const auto& p) -> Bytes {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, std::string>) {
                return Bytes(p.begin(), p.end());
            } else if constexpr (std::is_same_v<T, ImageBuf>) {
                return write_image_ppm(p);
            } else if constexpr (std::is_same_v<T, AudioBuf>) {
                return write_wav(p);
            } else {
                return write_video_archive(p);
            }
        },
        payload);
}

Payload payload_from_canonical(Modality modality, ByteView bytes) {
    switch (modality) {
        case Modality::Text: return std::string(bytes.begin(), bytes.end());
        case Modality::Image: return parse_image_ppm(bytes);
        case Modality::Audio: return parse_wav(bytes);
        case Modality::Video: return parse_video_archive(bytes);
    }
    throw Error(ErrorCode::UnsupportedFormat, "unknown modality");
}

std::string sha256_hex(ByteView bytes) {
    std::uint8_t digest[SHA256_DIGEST_LENGTH];
    SHA256(bytes.data(), bytes.size(), digest);
    std::string out;
    out.reserve(64);
    for (auto b : digest) out += fmt::format("{:02x}", b);
    return out;
}

std::string content_hash(const Payload& payload) { return sha256_hex(canonical_bytes(payload)); }

std::string base64_encode(ByteView bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

Bytes base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) throw Error(ErrorCode::BadResponse, "base64 length not a multiple of 4");
    Bytes out(3 * text.size() / 4);
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
    if (n < 0) throw Error(ErrorCode::BadResponse, "invalid base64");
    // EVP_DecodeBlock keeps the zero bytes produced by '=' padding.
    std::size_t pad = 0;
    if (!text.empty() && text.back() == '=') ++pad;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open {}", path.string()));
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, ByteView bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write {}", path.string()));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, fmt::format("short write to {}", path.string()));
}

Payload load_payload(const std::filesystem::path& path) {
    if (std::filesystem::is_directory(path)) return read_video_dir(path);
    const auto ext = path.extension().string();
    const auto bytes = read_file(path);
    if (ext == ".ppm") return parse_image_ppm(bytes);
    if (ext == ".wav") return parse_wav(bytes);
    return std::string(bytes.begin(), bytes.end());
}

std::filesystem::path save_payload(const Payload& payload, const std::filesystem::path& stem) {
    auto path = stem;
    switch (modality_of(payload)) {
        case Modality::Text: path += ".txt"; break;
        case Modality::Image: path += ".ppm"; break;
        case Modality::Audio: path += ".wav"; break;
        case Modality::Video:
            write_video_dir(std::get<VideoBuf>(payload), path);
            return path;
    }
    write_file(path, canonical_bytes(payload));
    return path;
}

}  // namespace maid
