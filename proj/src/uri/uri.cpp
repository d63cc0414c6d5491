#include "maid/uri.hpp"

#include <chrono>
#include <charconv>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "maid/codec.hpp"
#include "maid/error.hpp"

namespace maid {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string dump_line(const ordered_json& j) { return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace); }

const std::string& opt_or_empty(const std::optional<std::string>& v) {
    static const std::string empty;
    return v ? *v : empty;
}

std::optional<std::string> empty_to_nullopt(std::string s) {
    if (s.empty()) return std::nullopt;
    return s;
}

std::optional<std::uint64_t> seq_of(std::string_view uri) {
    const auto dash = uri.rfind('-');
    if (dash == std::string_view::npos) return std::nullopt;
    std::uint64_t v = 0;
    const auto* first = uri.data() + dash + 1;
    const auto* last = uri.data() + uri.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || first == last) return std::nullopt;
    return v;
}

}  // namespace

void validate(const RegistrationContext& ctx) {
    if (ctx.user_account.empty()) throw Error(ErrorCode::Syntax, "user_account is empty");
    for (char c : ctx.user_account)
        if (c == '/' || c == '?' || c == '#' || static_cast<unsigned char>(c) <= 0x20)
            throw Error(ErrorCode::Syntax, fmt::format("user_account '{}' is not a single path segment", ctx.user_account));
    if (ctx.timestamp <= 0) throw Error(ErrorCode::Syntax, fmt::format("timestamp {} is not positive", ctx.timestamp));
}

std::string yyyymmdd(std::int64_t utc_seconds) {
    using namespace std::chrono;
    const sys_seconds t{seconds{utc_seconds}};
    const year_month_day ymd{floor<days>(t)};
    return fmt::format("{:04}{:02}{:02}", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                       static_cast<unsigned>(ymd.day()));
}

std::string mint_uri(const RegistrationContext& ctx, Modality modality, std::string_view content_digest, std::uint64_t seq) {
    return fmt::format("maid://{}/{}/{}/{}-{}", ctx.user_account, to_string(modality), yyyymmdd(ctx.timestamp),
                       content_digest.substr(0, 16), seq);
}

DetailedDescription build_description(const RegistrationContext& ctx, Modality modality, std::string content_digest,
                                      std::string flow_name, std::vector<std::string> parent_uris, std::string note) {
    return {ctx, modality, std::move(content_digest), std::move(flow_name), std::move(parent_uris), std::move(note)};
}

std::string schema_header_line() {
    ordered_json j;
    j["schema"] = kRegistrySchema;
    j["version"] = kRegistrySchemaVersion;
    j["fields"] = ordered_json::array();
    for (auto f : kRecordFields) j["fields"].push_back(f);
    return dump_line(j);
}

std::string to_record_line(const UriRecord& r) {
    const auto& d = r.description;
    const auto& c = d.context;
    ordered_json j;
    j["uri"] = r.uri;
    j["embedding_ref"] = r.embedding_ref;
    j["content_digest"] = r.content_digest;
    j["modality"] = to_string(r.modality);
    j["user_account"] = c.user_account;
    j["device"] = c.device;
    j["ip"] = c.ip;
    j["timestamp"] = c.timestamp;
    j["flow_run_id"] = opt_or_empty(c.flow_run_id);
    j["stage_kind"] = opt_or_empty(c.stage_kind);
    j["flow_name"] = d.flow_name;
    j["parent_uris"] = d.parent_uris;
    j["note"] = d.note;
    return dump_line(j);
}

UriRecord parse_record_line(std::string_view line) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Syntax, fmt::format("record line: {}", e.what()));
    }
    if (!j.is_object() || j.size() != std::size(kRecordFields)) throw Error(ErrorCode::Syntax, "record line: wrong field set");
    try {
        UriRecord r;
        r.uri = j.at("uri").get<std::string>();
        r.embedding_ref = j.at("embedding_ref").get<std::size_t>();
        r.content_digest = j.at("content_digest").get<std::string>();
        const auto m = modality_from_string(j.at("modality").get<std::string>());
        if (!m) throw Error(ErrorCode::Syntax, "record line: unknown modality");
        r.modality = *m;
        auto& c = r.description.context;
        c.user_account = j.at("user_account").get<std::string>();
        c.device = j.at("device").get<std::string>();
        c.ip = j.at("ip").get<std::string>();
        c.timestamp = j.at("timestamp").get<std::int64_t>();
        c.flow_run_id = empty_to_nullopt(j.at("flow_run_id").get<std::string>());
        c.stage_kind = empty_to_nullopt(j.at("stage_kind").get<std::string>());
        r.description.modality = r.modality;
        r.description.content_digest = r.content_digest;
        r.description.flow_name = j.at("flow_name").get<std::string>();
        r.description.parent_uris = j.at("parent_uris").get<std::vector<std::string>>();
        r.description.note = j.at("note").get<std::string>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Syntax, fmt::format("record line: {}", e.what()));
    }
}

UriRegistry::UriRegistry(const UriRegistry& other) {
    std::shared_lock lock(other.mutex_);
    records_ = other.records_;
    by_uri_ = other.by_uri_;
    seq_ = other.seq_.load();
}

UriRegistry& UriRegistry::operator=(const UriRegistry& other) {
    if (this != &other) {
        std::scoped_lock lock(mutex_, other.mutex_);
        records_ = other.records_;
        by_uri_ = other.by_uri_;
        seq_ = other.seq_.load();
        journal_.reset();
    }
    return *this;
}

void UriRegistry::insert_locked(UriRecord record) {
    if (auto s = seq_of(record.uri)) {
        auto cur = seq_.load();
        while (*s >= cur && !seq_.compare_exchange_weak(cur, *s + 1)) {
        }
    }
    by_uri_.emplace(record.uri, records_.size());
    records_.push_back(std::move(record));
}

void UriRegistry::add(const UriRecord& record) {
    std::unique_lock lock(mutex_);
    if (by_uri_.contains(record.uri)) throw Error(ErrorCode::Syntax, fmt::format("uri {} already registered", record.uri));
    if (journal_) {
        const auto line = to_record_line(record) + "\n";
        journal_->write(line.data(), static_cast<std::streamsize>(line.size()));
        journal_->flush();
        if (!*journal_) throw Error(ErrorCode::PersistFailure, "registry journal write failed");
    }
    insert_locked(record);
}

UriRecord UriRegistry::lookup(std::string_view uri) const {
    std::shared_lock lock(mutex_);
    auto it = by_uri_.find(std::string(uri));
    if (it == by_uri_.end()) throw Error(ErrorCode::NotFound, fmt::format("no record for {}", uri));
    return records_[it->second];
}

bool UriRegistry::contains(std::string_view uri) const {
    std::shared_lock lock(mutex_);
    return by_uri_.contains(std::string(uri));
}

std::size_t UriRegistry::size() const {
    std::shared_lock lock(mutex_);
    return records_.size();
}

std::vector<UriRecord> UriRegistry::records() const {
    std::shared_lock lock(mutex_);
    return records_;
}

std::uint64_t UriRegistry::next_seq() { return seq_.fetch_add(1); }

void UriRegistry::attach_journal(const std::filesystem::path& path) {
    std::unique_lock lock(mutex_);
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    journal_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::app);
    if (!*journal_) throw Error(ErrorCode::Io, fmt::format("cannot open {}", path.string()));
    if (fresh) {
        const auto header = schema_header_line() + "\n";
        journal_->write(header.data(), static_cast<std::streamsize>(header.size()));
        journal_->flush();
    }
}

void save_registry(const UriRegistry& registry, const std::filesystem::path& path) {
    std::string out = schema_header_line() + "\n";
    {
        std::shared_lock lock(registry.mutex_);
        for (const auto& r : registry.records_) out += to_record_line(r) + "\n";
    }
    auto tmp = path;
    tmp += ".tmp";
    write_file(tmp, as_bytes(out));
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::Io, fmt::format("rename {} -> {}: {}", tmp.string(), path.string(), ec.message()));
}

UriRegistry load_registry(const std::filesystem::path& path, bool recover) {
    const auto bytes = read_file(path);
    const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    UriRegistry reg;
    if (text.empty()) return reg;

    std::size_t pos = 0;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        const bool terminated = nl != std::string_view::npos;
        const auto line = text.substr(pos, terminated ? nl - pos : std::string_view::npos);
        pos = terminated ? nl + 1 : text.size();
        ++line_no;
        const bool last = pos >= text.size();

        if (!header_seen) {
            ordered_json h;
            try {
                h = ordered_json::parse(line);
            } catch (const nlohmann::json::exception&) {
                if (recover && last) break;
                throw Error(ErrorCode::Corrupt, "registry header is not a JSON line");
            }
            if (!h.is_object() || h.value("schema", "") != kRegistrySchema)
                throw Error(ErrorCode::Corrupt, "registry header has the wrong schema");
            if (h.value("version", -1) != kRegistrySchemaVersion)
                throw Error(ErrorCode::VersionMismatch,
                            fmt::format("registry version {}, supported {}", h.value("version", -1), kRegistrySchemaVersion));
            header_seen = true;
            continue;
        }
        if (line.empty() && last) break;
        try {
            if (!terminated) throw Error(ErrorCode::Syntax, "unterminated line");
            auto rec = parse_record_line(line);
            if (reg.by_uri_.contains(rec.uri)) throw Error(ErrorCode::Syntax, fmt::format("duplicate uri {}", rec.uri));
            reg.insert_locked(std::move(rec));
        } catch (const Error& e) {
            if (recover && last) break;
            throw Error(ErrorCode::Corrupt, fmt::format("{} line {}: {}", path.string(), line_no, e.what()));
        }
    }
    return reg;
}

UriRecord register_output(const Artifact& artifact, const RegistrationContext& ctx, const Embedder& embedder,
                          EmbeddingStore& store, UriRegistry& registry, const RegisterOptions& options) {
    static std::mutex serial;
    validate(ctx);
    auto embedding = embedder(artifact.payload);
    auto digest = content_hash(artifact.payload);

    std::lock_guard lock(serial);
    UriRecord rec;
    rec.uri = mint_uri(ctx, artifact.modality, digest, registry.next_seq());
    rec.modality = artifact.modality;
    rec.content_digest = digest;
    rec.description = build_description(ctx, artifact.modality, std::move(digest), options.flow_name, options.parent_uris,
                                        options.note);
    rec.embedding_ref = store.put(rec.uri, embedding);
    try {
        registry.add(rec);
    } catch (...) {
        // The row may already be journaled; orphan it rather than shift later indices.
        store.set_uri(rec.modality, rec.embedding_ref, {});
        throw;
    }
    return rec;
}

}  // namespace maid
