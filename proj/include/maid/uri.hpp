#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "maid/fingerprint.hpp"
#include "maid/modality.hpp"
#include "maid/retrieval.hpp"

namespace maid {

/// Who registered an output, from where, and when.
struct RegistrationContext {
    std::string device;
    std::string ip;
    std::string user_account;
    std::int64_t timestamp = 0;  // UTC seconds
    std::optional<std::string> flow_run_id;
    std::optional<std::string> stage_kind;

    bool operator==(const RegistrationContext&) const = default;
};

/// Throws Syntax unless the account is a nonempty URI path segment and the
/// timestamp is positive.
void validate(const RegistrationContext& ctx);

struct DetailedDescription {
    RegistrationContext context;
    Modality modality = Modality::Text;
    std::string content_digest;
    std::string flow_name;
    std::vector<std::string> parent_uris;
    std::string note;

    bool operator==(const DetailedDescription&) const = default;
};

struct UriRecord {
    std::string uri;
    DetailedDescription description;
    std::size_t embedding_ref = 0;  // row in the store segment of `modality`
    std::string content_digest;
    Modality modality = Modality::Text;

    bool operator==(const UriRecord&) const = default;
};

/// "maid://{user}/{modality}/{yyyymmdd}/{digest[0:16]}-{seq}".
std::string mint_uri(const RegistrationContext& ctx, Modality modality, std::string_view content_digest, std::uint64_t seq);
/// Date part of a minted URI for a UTC timestamp.
std::string yyyymmdd(std::int64_t utc_seconds);

DetailedDescription build_description(const RegistrationContext& ctx, Modality modality, std::string content_digest,
                                      std::string flow_name = {}, std::vector<std::string> parent_uris = {},
                                      std::string note = {});

inline constexpr std::string_view kRegistrySchema = "maid.registry";
inline constexpr int kRegistrySchemaVersion = 1;

/// Registry file layout. The first line is the schema header
/// {"schema":"maid.registry","version":1,"fields":[...]}; every following
/// line is one record with keys in exactly this order. Absent optionals are
/// written as "".
inline constexpr std::string_view kRecordFields[] = {
    "uri",  "embedding_ref", "content_digest", "modality",  "user_account", "device", "ip",
    "timestamp", "flow_run_id", "stage_kind", "flow_name", "parent_uris",  "note"};

std::string schema_header_line();
std::string to_record_line(const UriRecord& record);
/// Throws Syntax on malformed lines.
UriRecord parse_record_line(std::string_view line);

/// In-memory uri -> record map with an optional append-only line journal.
/// Many readers, one writer.
class UriRegistry {
public:
    UriRegistry() = default;
    UriRegistry(const UriRegistry& other);
    UriRegistry& operator=(const UriRegistry& other);

    /// Throws Syntax on a duplicate uri, PersistFailure if the journal
    /// write fails (the record is then not added).
    void add(const UriRecord& record);
    /// Throws NotFound.
    UriRecord lookup(std::string_view uri) const;
    bool contains(std::string_view uri) const;
    std::size_t size() const;
    /// Records in registration order.
    std::vector<UriRecord> records() const;

    /// Per-registry monotonic counter; resumes past the highest seq seen on load.
    std::uint64_t next_seq();

    void attach_journal(const std::filesystem::path& path);

    friend void save_registry(const UriRegistry& registry, const std::filesystem::path& path);
    friend UriRegistry load_registry(const std::filesystem::path& path, bool recover);

private:
    void insert_locked(UriRecord record);

    mutable std::shared_mutex mutex_;
    std::vector<UriRecord> records_;
    std::unordered_map<std::string, std::size_t> by_uri_;
    std::atomic<std::uint64_t> seq_{0};
    std::unique_ptr<std::ofstream> journal_;
};

/// Writes header + all records to a temporary file renamed into place.
void save_registry(const UriRegistry& registry, const std::filesystem::path& path);
/// Throws Io, VersionMismatch or Corrupt. With `recover`, an unterminated or
/// unparsable final line is dropped.
UriRegistry load_registry(const std::filesystem::path& path, bool recover = false);

struct RegisterOptions {
    std::string flow_name;
    std::vector<std::string> parent_uris;
    std::string note;
};

/// Digest, URI, embedding and record for one output. The embedding is
/// appended to the store before the record is persisted, so an interrupted
/// registration leaves at most an unreferenced trailing embedding. Throws
/// EmbedderModalityMismatch, StoreFull or PersistFailure.
UriRecord register_output(const Artifact& artifact, const RegistrationContext& ctx, const Embedder& embedder,
                          EmbeddingStore& store, UriRegistry& registry, const RegisterOptions& options = {});

/// Store + registry living in one directory:
///   vectors.urix      embedding store (journaled)
///   registry.jsonl    record lines (journaled)
///   payloads/         canonical payload bytes by digest, when retained
class ProvenanceRegistry {
public:
    struct Options {
        bool retain_payloads = false;
        std::size_t capacity_per_segment = EmbeddingStore::kDefaultCapacity;
    };

    /// Purely in-memory.
    explicit ProvenanceRegistry(Options options);
    ProvenanceRegistry() : ProvenanceRegistry(Options{}) {}

    /// Loads (recovering from an interrupted registration), compacts and
    /// journals further registrations into `dir`.
    static std::unique_ptr<ProvenanceRegistry> open(const std::filesystem::path& dir, Options options);
    static std::unique_ptr<ProvenanceRegistry> open(const std::filesystem::path& dir) { return open(dir, Options{}); }

    UriRecord register_artifact(const Artifact& artifact, const RegistrationContext& ctx, const RegisterOptions& options = {});
    UriRecord lookup(std::string_view uri) const { return registry_.lookup(uri); }
    std::optional<std::string> uri_of(const ArtifactId& id) const;

    QueryResult search(const Payload& payload, std::size_t k) const;
    QueryResult search(const Embedding& query, std::size_t k) const;

    /// Re-hashes the retained payload; false when it differs or was not kept.
    bool verify(std::string_view uri) const;

    /// Rewrites both files; no-op for an in-memory registry.
    void save();

    const EmbeddingStore& store() const noexcept { return store_; }
    const UriRegistry& registry() const noexcept { return registry_; }
    const std::optional<std::filesystem::path>& directory() const noexcept { return dir_; }

private:
    std::filesystem::path payload_path(std::string_view digest) const;

    Options options_;
    std::optional<std::filesystem::path> dir_;
    bool journaled_ = false;
    EmbeddingStore store_;
    UriRegistry registry_;
    mutable std::mutex write_mutex_;
    mutable std::shared_mutex ids_mutex_;
    std::map<ArtifactId, std::string> by_artifact_;
};

}  // namespace maid
