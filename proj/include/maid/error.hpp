#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace maid {

enum class ErrorCode {
    // codecs
    BadMagic,
    BadHeader,
    TruncatedPayload,
    UnsupportedFormat,
    Truncated,
    // flows and runs
    Syntax,
    UnknownStageKind,
    DuplicateNodeId,
    InputModalityMismatch,
    ModalityMismatch,
    BackendFailure,
    WrongState,
    NotFound,
    // backends
    CorpusTooSmall,
    BadDimensions,
    TextTooLong,
    BadFrameLength,
    BadFrameCount,
    EmptyKb,
    Transport,
    RemoteError,
    BadResponse,
    // fingerprints
    EmptyContent,
    TooSmall,
    TooShort,
    TooFewFrames,
    // registry and store
    EmbedderModalityMismatch,
    StoreFull,
    PersistFailure,
    DimMismatch,
    EmptySegment,
    DegenerateData,
    Io,
    VersionMismatch,
    Corrupt,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure in the library surfaces as this exception; `code()` is the
/// stable discriminator callers branch on, `what()` is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace maid
