#include <fmt/format.h>

#include "maid/codec.hpp"
#include "maid/error.hpp"
#include "maid/uri.hpp"

namespace maid {
namespace {

constexpr const char* kVectorFile = "vectors.urix";
constexpr const char* kRegistryFile = "registry.jsonl";
constexpr const char* kPayloadDir = "payloads";

}  // namespace

ProvenanceRegistry::ProvenanceRegistry(Options options) : options_(options), store_(options.capacity_per_segment) {}

std::unique_ptr<ProvenanceRegistry> ProvenanceRegistry::open(const std::filesystem::path& dir, Options options) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, fmt::format("cannot create {}: {}", dir.string(), ec.message()));
    if (options.retain_payloads) std::filesystem::create_directories(dir / kPayloadDir, ec);

    auto reg = std::make_unique<ProvenanceRegistry>(options);
    reg->dir_ = dir;
    const auto vec_path = dir / kVectorFile;
    const auto rec_path = dir / kRegistryFile;
    if (std::filesystem::exists(vec_path)) reg->store_ = load_store(vec_path, true);
    if (std::filesystem::exists(rec_path)) reg->registry_ = load_registry(rec_path, true);

    // Records are written last, so every record must resolve; trailing rows
    // with no record belong to an interrupted registration.
    std::array<std::size_t, 4> referenced{};
    const auto records = reg->registry_.records();
    for (const auto& r : records) {
        auto& n = referenced[static_cast<std::size_t>(r.modality)];
        n = std::max(n, r.embedding_ref + 1);
    }
    for (std::size_t m = 0; m < referenced.size(); ++m) {
        const auto modality = static_cast<Modality>(m);
        if (referenced[m] > reg->store_.count(modality))
            throw Error(ErrorCode::Corrupt, fmt::format("registry references {} row {} but the store holds {}",
                                                        to_string(modality), referenced[m] - 1, reg->store_.count(modality)));
        reg->store_.truncate(modality, referenced[m]);
    }
    for (const auto& r : records) reg->store_.set_uri(r.modality, r.embedding_ref, r.uri);

    reg->save();
    reg->store_.attach_journal(vec_path);
    reg->registry_.attach_journal(rec_path);
    reg->journaled_ = true;
    return reg;
}

std::filesystem::path ProvenanceRegistry::payload_path(std::string_view digest) const {
    return *dir_ / kPayloadDir / fmt::format("{}.bin", digest);
}

UriRecord ProvenanceRegistry::register_artifact(const Artifact& artifact, const RegistrationContext& ctx,
                                                const RegisterOptions& options) {
    std::lock_guard lock(write_mutex_);
    if (options_.retain_payloads && dir_) {
        const auto bytes = canonical_bytes(artifact.payload);
        const auto path = payload_path(sha256_hex(bytes));
        if (!std::filesystem::exists(path)) write_file(path, bytes);
    }
    auto rec = register_output(artifact, ctx, Embedder(artifact.modality), store_, registry_, options);
    std::unique_lock ids(ids_mutex_);
    by_artifact_[artifact.id] = rec.uri;
    return rec;
}

std::optional<std::string> ProvenanceRegistry::uri_of(const ArtifactId& id) const {
    std::shared_lock lock(ids_mutex_);
    auto it = by_artifact_.find(id);
    if (it == by_artifact_.end()) return std::nullopt;
    return it->second;
}

QueryResult ProvenanceRegistry::search(const Payload& payload, std::size_t k) const { return search(embed(payload), k); }

QueryResult ProvenanceRegistry::search(const Embedding& query, std::size_t k) const {
    auto hits = store_.topk(query, k);
    std::erase_if(hits, [](const Hit& h) { return h.uri.empty(); });
    return hits;
}

bool ProvenanceRegistry::verify(std::string_view uri) const {
    const auto rec = registry_.lookup(uri);
    if (!options_.retain_payloads || !dir_) return false;
    const auto path = payload_path(rec.content_digest);
    if (!std::filesystem::exists(path)) return false;
    return sha256_hex(read_file(path)) == rec.content_digest;
}

void ProvenanceRegistry::save() {
    if (!dir_) return;
    std::lock_guard lock(write_mutex_);
    save_store(store_, *dir_ / kVectorFile);
    save_registry(registry_, *dir_ / kRegistryFile);
    // The rename replaced the journaled files; reopen onto the new ones.
    if (journaled_) {
        store_.attach_journal(*dir_ / kVectorFile);
        registry_.attach_journal(*dir_ / kRegistryFile);
    }
}

}  // namespace maid
