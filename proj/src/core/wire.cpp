#include "maid/wire.hpp"

#include <fmt/format.h>

#include "maid/codec.hpp"
#include "maid/error.hpp"

namespace maid::wire {

nlohmann::json encode_payload(const Payload& payload) {
    const auto m = modality_of(payload);
    nlohmann::json j;
    j["modality"] = to_string(m);
    if (m == Modality::Text) {
        j["encoding"] = "utf8";
        j["data"] = std::get<std::string>(payload);
    } else {
        j["encoding"] = "base64";
        j["data"] = base64_encode(canonical_bytes(payload));
    }
    return j;
}

Payload decode_payload(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::Syntax, "artifact must be an object");
    auto field = [&](const char* name) -> std::string {
        auto it = j.find(name);
        if (it == j.end() || !it->is_string()) throw Error(ErrorCode::Syntax, fmt::format("artifact.{} must be a string", name));
        return it->get<std::string>();
    };
    const auto modality = modality_from_string(field("modality"));
    if (!modality) throw Error(ErrorCode::Syntax, "unknown artifact modality");
    const auto encoding = field("encoding");
    const auto data = field("data");
    try {
        if (encoding == "utf8") {
            if (*modality != Modality::Text) throw Error(ErrorCode::Syntax, "utf8 encoding is only valid for text");
            return data;
        }
        if (encoding == "base64") return payload_from_canonical(*modality, base64_decode(data));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Syntax) throw;
        throw Error(ErrorCode::Syntax, fmt::format("artifact data: {}", e.what()));
    }
    throw Error(ErrorCode::Syntax, fmt::format("unknown encoding '{}'", encoding));
}

nlohmann::json encode_params(const Params& params) {
    auto j = nlohmann::json::object();
    for (const auto& [k, v] : params) std::visit([&, &key = k](const auto& x) { j[key] = x; }, v);
    return j;
}

Params decode_params(const nlohmann::json& j) {
    Params p;
    if (j.is_null()) return p;
    if (!j.is_object()) throw Error(ErrorCode::Syntax, "params must be an object");
    for (const auto& [k, v] : j.items()) {
        if (v.is_boolean()) p[k] = v.get<bool>();
        else if (v.is_number_integer()) p[k] = v.get<std::int64_t>();
        else if (v.is_number_float()) p[k] = v.get<double>();
        else if (v.is_string()) p[k] = v.get<std::string>();
        else throw Error(ErrorCode::Syntax, fmt::format("param '{}' must be a scalar", k));
    }
    return p;
}

nlohmann::json encode_artifact(const Artifact& a) {
    auto j = encode_payload(a.payload);
    j["id"] = a.id.hex();
    auto parents = nlohmann::json::array();
    for (const auto& p : a.parent_ids) parents.push_back(p.hex());
    j["parent_ids"] = std::move(parents);
    j["created_at"] = a.created_at;
    j["stage_kind"] = a.stage_kind ? nlohmann::json(*a.stage_kind) : nlohmann::json(nullptr);
    return j;
}

}  // namespace maid::wire
