#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "maid/modality.hpp"

namespace maid {

enum class StageKind : std::uint8_t {
    TextGen,
    Chat,
    TextToImage,
    ImageToText,
    StyleTransfer,
    ImageEdit,
    Tts,
    Asr,
    TextToVideo,
    VideoSummary,
    Translate,
    PromptExpand,
};

inline constexpr std::array kAllStageKinds = {
    StageKind::TextGen,     StageKind::Chat,        StageKind::TextToImage,  StageKind::ImageToText,
    StageKind::StyleTransfer, StageKind::ImageEdit, StageKind::Tts,          StageKind::Asr,
    StageKind::TextToVideo, StageKind::VideoSummary, StageKind::Translate,   StageKind::PromptExpand,
};

std::string_view to_string(StageKind k) noexcept;
std::optional<StageKind> stage_kind_from_string(std::string_view s) noexcept;

struct Port {
    std::string_view name;
    Modality modality;
};

/// Fixed typing of a stage kind. Every kind has a single output port "out";
/// StyleTransfer takes ports "content" and "style", everything else "in".
struct Signature {
    std::vector<Port> inputs;
    Modality output;

    std::optional<Modality> input_modality(std::string_view port) const;
};

const Signature& signature(StageKind k);

inline constexpr std::string_view kOutputPort = "out";

/// Text and image outputs are the only ones a human may edit mid-run.
inline bool is_editable(Modality m) noexcept { return m == Modality::Text || m == Modality::Image; }

using Scalar = std::variant<bool, std::int64_t, double, std::string>;
using Params = std::map<std::string, Scalar, std::less<>>;

std::int64_t param_int(const Params& p, std::string_view key, std::int64_t fallback);
double param_double(const Params& p, std::string_view key, double fallback);
std::string param_string(const Params& p, std::string_view key, std::string_view fallback);

// Per-kind defaults shared by every backend.
inline constexpr std::int64_t kDefaultSeed = 0;
inline constexpr std::int64_t kDefaultLength = 200;
inline constexpr double kDefaultStrength = 0.5;
inline constexpr std::int64_t kDefaultImageSide = 64;
inline constexpr std::int64_t kDefaultFrames = 16;
inline constexpr std::int64_t kDefaultExpandK = 3;
inline constexpr double kDefaultTemperature = 0.6;

}  // namespace maid
