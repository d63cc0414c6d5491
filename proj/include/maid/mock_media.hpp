#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "maid/modality.hpp"

namespace maid {

/// Procedural image: three plane waves, frequencies and phases from
/// SHA-256(prompt || seed as u64 LE), summed with a per-channel phase shift
/// and amplified into saturation. Sides must lie in [8, 1024].
ImageBuf mock_text_to_image(std::string_view prompt, std::uint64_t seed, std::uint32_t width, std::uint32_t height);

/// Frame k is the same field as mock_text_to_image with every phase advanced
/// by a per-wave angular velocity times k / fps. 2 <= frames <= 256.
VideoBuf mock_text_to_video(std::string_view prompt, std::uint64_t seed, std::uint32_t frames,
                            std::uint32_t width = 64, std::uint32_t height = 64);

/// Per-channel mean/std matching of content onto style, blended by strength.
ImageBuf mock_style_transfer(const ImageBuf& content, const ImageBuf& style, double strength);

/// Contrast stretch about each channel mean by (1 + strength).
ImageBuf mock_image_edit(const ImageBuf& img, double strength);

/// "a {dark|medium|bright} {red|green|blue} {flat|textured} scene"
std::string mock_image_to_text(const ImageBuf& img);

/// "summary: " + caption of the medoid frame under image-embedding distance.
std::string mock_video_summary(const VideoBuf& video);
/// Index of the frame with least summed embedding distance to the rest
/// (lowest index on ties).
std::size_t medoid_frame(const VideoBuf& video);

}  // namespace maid
