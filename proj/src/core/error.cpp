#include "maid/error.hpp"

namespace maid {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::BadHeader: return "BadHeader";
        case ErrorCode::TruncatedPayload: return "TruncatedPayload";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::Truncated: return "Truncated";
        case ErrorCode::Syntax: return "Syntax";
        case ErrorCode::UnknownStageKind: return "UnknownStageKind";
        case ErrorCode::DuplicateNodeId: return "DuplicateNodeId";
        case ErrorCode::InputModalityMismatch: return "InputModalityMismatch";
        case ErrorCode::ModalityMismatch: return "ModalityMismatch";
        case ErrorCode::BackendFailure: return "BackendFailure";
        case ErrorCode::WrongState: return "WrongState";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::CorpusTooSmall: return "CorpusTooSmall";
        case ErrorCode::BadDimensions: return "BadDimensions";
        case ErrorCode::TextTooLong: return "TextTooLong";
        case ErrorCode::BadFrameLength: return "BadFrameLength";
        case ErrorCode::BadFrameCount: return "BadFrameCount";
        case ErrorCode::EmptyKb: return "EmptyKb";
        case ErrorCode::Transport: return "Transport";
        case ErrorCode::RemoteError: return "RemoteError";
        case ErrorCode::BadResponse: return "BadResponse";
        case ErrorCode::EmptyContent: return "EmptyContent";
        case ErrorCode::TooSmall: return "TooSmall";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::TooFewFrames: return "TooFewFrames";
        case ErrorCode::EmbedderModalityMismatch: return "EmbedderModalityMismatch";
        case ErrorCode::StoreFull: return "StoreFull";
        case ErrorCode::PersistFailure: return "PersistFailure";
        case ErrorCode::DimMismatch: return "DimMismatch";
        case ErrorCode::EmptySegment: return "EmptySegment";
        case ErrorCode::DegenerateData: return "DegenerateData";
        case ErrorCode::Io: return "Io";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::Corrupt: return "Corrupt";
    }
    return "Unknown";
}

}  // namespace maid
