#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maid/modality.hpp"

namespace maid {

/// Fixed embedding width per modality.
constexpr std::size_t embedding_dim(Modality m) noexcept {
    switch (m) {
        case Modality::Text: return 256;
        case Modality::Image: return 64;
        case Modality::Audio: return 32;
        case Modality::Video: return 128;
    }
    return 0;
}

/// Unit-norm fingerprint of one payload. Flat or silent inputs produce the
/// zero vector with `degenerate` set; such vectors score 0 against anything.
struct Embedding {
    Modality modality = Modality::Text;
    std::vector<float> values;
    bool degenerate = false;
};

/// Lowercase ASCII, collapse whitespace runs to one space, trim both ends.
std::string normalize_text(std::string_view text);
std::uint32_t fnv1a32(std::string_view bytes) noexcept;

// Character 3-grams hashed into 256 buckets, weight 1+ln(tf) per 3-gram.
Embedding embed_text(std::string_view text);
// 8x8 grid of luma cell means, centered.
Embedding embed_image(const ImageBuf& img);
// 32 log band energies averaged over 1024-sample frames (hop 512).
Embedding embed_audio(const AudioBuf& audio);
// Static half (mean frame descriptor) + motion half (mean |frame delta|).
Embedding embed_video(const VideoBuf& video);

Embedding embed(const Payload& payload);

double cosine(const Embedding& a, const Embedding& b);
double l2_norm(std::span<const float> v);

/// Binds an embedding function to one modality, so callers can be checked
/// against the payload they hand it.
class Embedder {
public:
    explicit Embedder(Modality m) : modality_(m) {}
    Modality modality() const noexcept { return modality_; }
    /// Throws EmbedderModalityMismatch if the payload is of another modality.
    Embedding operator()(const Payload& payload) const;

private:
    Modality modality_;
};

namespace dsp {
/// In-place forward DFT (unnormalized).
void fft(std::span<std::complex<double>> data);
/// Band features of one audio frame (exposed for testing the framing).
std::vector<double> band_features(std::span<const double> frame);
}  // namespace dsp

}  // namespace maid
