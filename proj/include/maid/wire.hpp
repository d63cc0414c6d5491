#pragma once

#include <nlohmann/json.hpp>

#include "maid/modality.hpp"
#include "maid/stage.hpp"

namespace maid::wire {

// One encoding everywhere an artifact crosses a process boundary:
//   {"modality": "text"|"image"|"audio"|"video",
//    "encoding": "utf8"|"base64",
//    "data": <utf8 text | base64 of canonical PPM / WAV / frame archive>}
// Decoding failures throw Error(Syntax).

nlohmann::json encode_payload(const Payload& payload);
Payload decode_payload(const nlohmann::json& j);

nlohmann::json encode_params(const Params& params);
Params decode_params(const nlohmann::json& j);

/// Full artifact view: the payload fields plus id, parent_ids, created_at
/// and stage_kind.
nlohmann::json encode_artifact(const Artifact& a);

}  // namespace maid::wire
