#include "maid/stage.hpp"

#include <fmt/format.h>

#include "maid/error.hpp"

namespace maid {

std::string_view to_string(StageKind k) noexcept {
    switch (k) {
        case StageKind::TextGen: return "TextGen";
        case StageKind::Chat: return "Chat";
        case StageKind::TextToImage: return "TextToImage";
        case StageKind::ImageToText: return "ImageToText";
        case StageKind::StyleTransfer: return "StyleTransfer";
        case StageKind::ImageEdit: return "ImageEdit";
        case StageKind::Tts: return "Tts";
        case StageKind::Asr: return "Asr";
        case StageKind::TextToVideo: return "TextToVideo";
        case StageKind::VideoSummary: return "VideoSummary";
        case StageKind::Translate: return "Translate";
        case StageKind::PromptExpand: return "PromptExpand";
    }
    return "TextGen";
}

std::optional<StageKind> stage_kind_from_string(std::string_view s) noexcept {
    for (auto k : kAllStageKinds)
        if (to_string(k) == s) return k;
    return std::nullopt;
}

std::optional<Modality> Signature::input_modality(std::string_view port) const {
    for (const auto& p : inputs)
        if (p.name == port) return p.modality;
    return std::nullopt;
}

const Signature& signature(StageKind k) {
    using M = Modality;
    static const std::map<StageKind, Signature> table = {
        {StageKind::TextGen, {{{"in", M::Text}}, M::Text}},
        {StageKind::Chat, {{{"in", M::Text}}, M::Text}},
        {StageKind::Translate, {{{"in", M::Text}}, M::Text}},
        {StageKind::PromptExpand, {{{"in", M::Text}}, M::Text}},
        {StageKind::TextToImage, {{{"in", M::Text}}, M::Image}},
        {StageKind::ImageToText, {{{"in", M::Image}}, M::Text}},
        {StageKind::StyleTransfer, {{{"content", M::Image}, {"style", M::Image}}, M::Image}},
        {StageKind::ImageEdit, {{{"in", M::Image}}, M::Image}},
        {StageKind::Tts, {{{"in", M::Text}}, M::Audio}},
        {StageKind::Asr, {{{"in", M::Audio}}, M::Text}},
        {StageKind::TextToVideo, {{{"in", M::Text}}, M::Video}},
        {StageKind::VideoSummary, {{{"in", M::Video}}, M::Text}},
    };
    return table.at(k);
}

namespace {
const Scalar* find(const Params& p, std::string_view key) {
    auto it = p.find(key);
    return it == p.end() ? nullptr : &it->second;
}
}  // namespace

std::int64_t param_int(const Params& p, std::string_view key, std::int64_t fallback) {
    const auto* v = find(p, key);
    if (!v) return fallback;
    if (const auto* i = std::get_if<std::int64_t>(v)) return *i;
    if (const auto* d = std::get_if<double>(v)) return static_cast<std::int64_t>(*d);
    throw Error(ErrorCode::Syntax, fmt::format("param '{}' must be numeric", key));
}

double param_double(const Params& p, std::string_view key, double fallback) {
    const auto* v = find(p, key);
    if (!v) return fallback;
    if (const auto* d = std::get_if<double>(v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(v)) return static_cast<double>(*i);
    throw Error(ErrorCode::Syntax, fmt::format("param '{}' must be numeric", key));
}

std::string param_string(const Params& p, std::string_view key, std::string_view fallback) {
    const auto* v = find(p, key);
    if (!v) return std::string(fallback);
    if (const auto* s = std::get_if<std::string>(v)) return *s;
    throw Error(ErrorCode::Syntax, fmt::format("param '{}' must be a string", key));
}

}  // namespace maid
