#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maid/modality.hpp"

namespace maid {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

// Binary PPM (P6, maxval 255). Header whitespace and '#' comments follow
// the netpbm convention; bytes after the raster are ignored.
ImageBuf parse_image_ppm(ByteView bytes);
Bytes write_image_ppm(const ImageBuf& img);

// 16-bit mono 16 kHz PCM only.
AudioBuf parse_wav(ByteView bytes);
Bytes write_wav(const AudioBuf& audio);

// The frame archive is the canonical video byte form: each frame's canonical
// PPM back to back, then a single fps byte.
VideoBuf parse_video_archive(ByteView bytes);
Bytes write_video_archive(const VideoBuf& video);

// On-disk video manifest: frame_00000.ppm ... plus meta.json {fps, frame_count}.
void write_video_dir(const VideoBuf& video, const std::filesystem::path& dir);
VideoBuf read_video_dir(const std::filesystem::path& dir);

/// Canonical bytes used for hashing and for the wire: UTF-8 text, canonical
/// PPM, canonical WAV, or the frame archive.
Bytes canonical_bytes(const Payload& payload);
Payload payload_from_canonical(Modality modality, ByteView bytes);

std::string sha256_hex(ByteView bytes);
/// Lowercase hex SHA-256 of the payload's canonical bytes.
std::string content_hash(const Payload& payload);

std::string base64_encode(ByteView bytes);
Bytes base64_decode(std::string_view text);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, ByteView bytes);

/// Loads a payload from disk by shape: directory = video manifest, .ppm,
/// .wav, anything else is read as UTF-8 text.
Payload load_payload(const std::filesystem::path& path);
/// Writes to `stem` plus the modality's extension (video: a directory).
std::filesystem::path save_payload(const Payload& payload, const std::filesystem::path& stem);

}  // namespace maid
