#include <bit>
#include <cstring>
#include <mutex>

#include <fmt/format.h>

#include "maid/codec.hpp"
#include "maid/error.hpp"
#include "maid/retrieval.hpp"

namespace maid {
namespace {

constexpr char kMagic[4] = {'U', 'R', 'I', 'X'};
constexpr std::size_t kHeaderBytes = 8;
constexpr std::size_t kSegmentHeaderBytes = 1 + 4 + 8;

template <typename T>
void put_le(Bytes& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(const std::uint8_t* p) {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
    return v;
}

Bytes file_header() {
    Bytes out(kMagic, kMagic + 4);
    put_le<std::uint32_t>(out, EmbeddingStore::kFormatVersion);
    return out;
}

void append_segment(Bytes& out, Modality m, std::uint32_t dim, std::span<const float> values) {
    out.push_back(static_cast<std::uint8_t>(m));
    put_le<std::uint32_t>(out, dim);
    put_le<std::uint64_t>(out, dim == 0 ? 0 : values.size() / dim);
    for (float f : values) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
}

}  // namespace

EmbeddingStore::EmbeddingStore(std::size_t capacity_per_segment) : capacity_(capacity_per_segment) {
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        segments_[i].modality = static_cast<Modality>(i);
        segments_[i].dim = static_cast<std::uint32_t>(embedding_dim(segments_[i].modality));
    }
}

EmbeddingStore::EmbeddingStore(const EmbeddingStore& other) {
    std::shared_lock lock(other.mutex_);
    segments_ = other.segments_;
    capacity_ = other.capacity_;
}

EmbeddingStore& EmbeddingStore::operator=(const EmbeddingStore& other) {
    if (this != &other) {
        std::scoped_lock lock(mutex_, other.mutex_);
        segments_ = other.segments_;
        capacity_ = other.capacity_;
        journal_.reset();
    }
    return *this;
}

EmbeddingStore::~EmbeddingStore() = default;

std::size_t EmbeddingStore::put(const std::string& uri, const Embedding& e) { return put(e.modality, uri, e.values); }

std::size_t EmbeddingStore::put(Modality m, const std::string& uri, std::span<const float> values) {
    std::unique_lock lock(mutex_);
    auto& seg = segments_[static_cast<std::size_t>(m)];
    if (values.size() != seg.dim)
        throw Error(ErrorCode::DimMismatch, fmt::format("{} segment takes dim {}, got {}", to_string(m), seg.dim, values.size()));
    if (seg.count() >= capacity_) throw Error(ErrorCode::StoreFull, fmt::format("{} segment holds {} rows", to_string(m), capacity_));
    if (journal_) {
        Bytes rec;
        append_segment(rec, m, seg.dim, values);
        journal_->write(reinterpret_cast<const char*>(rec.data()), static_cast<std::streamsize>(rec.size()));
        journal_->flush();
        if (!*journal_) throw Error(ErrorCode::PersistFailure, "vector journal write failed");
    }
    const std::size_t index = seg.count();
    seg.data.insert(seg.data.end(), values.begin(), values.end());
    seg.uris.push_back(uri);
    return index;
}

QueryResult EmbeddingStore::topk(const Embedding& query, std::size_t k, int workers) const {
    std::shared_lock lock(mutex_);
    const auto& seg = segments_[static_cast<std::size_t>(query.modality)];
    if (seg.count() == 0) throw Error(ErrorCode::EmptySegment, fmt::format("no {} embeddings stored", to_string(query.modality)));
    if (query.values.size() != seg.dim)
        throw Error(ErrorCode::DimMismatch, fmt::format("query dim {} vs segment dim {}", query.values.size(), seg.dim));
    QueryResult out;
    for (const auto& s : kernels::topk_parallel(seg.data, seg.dim, query.values, k, workers))
        out.push_back({seg.uris[s.index], s.score, s.index});
    return out;
}

std::size_t EmbeddingStore::count(Modality m) const {
    std::shared_lock lock(mutex_);
    return segments_[static_cast<std::size_t>(m)].count();
}

std::vector<float> EmbeddingStore::vector(Modality m, std::size_t index) const {
    std::shared_lock lock(mutex_);
    const auto& seg = segments_[static_cast<std::size_t>(m)];
    if (index >= seg.count()) throw Error(ErrorCode::NotFound, fmt::format("no {} row {}", to_string(m), index));
    return {seg.data.begin() + static_cast<std::ptrdiff_t>(index * seg.dim),
            seg.data.begin() + static_cast<std::ptrdiff_t>((index + 1) * seg.dim)};
}

std::string EmbeddingStore::uri(Modality m, std::size_t index) const {
    std::shared_lock lock(mutex_);
    const auto& seg = segments_[static_cast<std::size_t>(m)];
    if (index >= seg.count()) throw Error(ErrorCode::NotFound, fmt::format("no {} row {}", to_string(m), index));
    return seg.uris[index];
}

void EmbeddingStore::set_uri(Modality m, std::size_t index, std::string uri) {
    std::unique_lock lock(mutex_);
    auto& seg = segments_[static_cast<std::size_t>(m)];
    if (index >= seg.count()) throw Error(ErrorCode::NotFound, fmt::format("no {} row {}", to_string(m), index));
    seg.uris[index] = std::move(uri);
}

void EmbeddingStore::truncate(Modality m, std::size_t count) {
    std::unique_lock lock(mutex_);
    auto& seg = segments_[static_cast<std::size_t>(m)];
    if (count >= seg.count()) return;
    seg.data.resize(count * seg.dim);
    seg.uris.resize(count);
}

EmbeddingStore::Segment EmbeddingStore::segment(Modality m) const {
    std::shared_lock lock(mutex_);
    return segments_[static_cast<std::size_t>(m)];
}

void EmbeddingStore::attach_journal(const std::filesystem::path& path) {
    std::unique_lock lock(mutex_);
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    journal_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::app);
    if (!*journal_) throw Error(ErrorCode::Io, fmt::format("cannot open {}", path.string()));
    if (fresh) {
        const auto header = file_header();
        journal_->write(reinterpret_cast<const char*>(header.data()), static_cast<std::streamsize>(header.size()));
        journal_->flush();
    }
}

bool EmbeddingStore::same_vectors(const EmbeddingStore& other) const {
    std::shared_lock a(mutex_);
    std::shared_lock b(other.mutex_);
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const auto& x = segments_[i].data;
        const auto& y = other.segments_[i].data;
        if (x.size() != y.size() || std::memcmp(x.data(), y.data(), x.size() * sizeof(float)) != 0) return false;
    }
    return true;
}

void save_store(const EmbeddingStore& store, const std::filesystem::path& path) {
    Bytes out = file_header();
    {
        std::shared_lock lock(store.mutex_);
        for (const auto& seg : store.segments_) append_segment(out, seg.modality, seg.dim, seg.data);
    }
    auto tmp = path;
    tmp += ".tmp";
    write_file(tmp, out);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::Io, fmt::format("rename {} -> {}: {}", tmp.string(), path.string(), ec.message()));
}

EmbeddingStore load_store(const std::filesystem::path& path, bool recover) {
    const auto bytes = read_file(path);
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw Error(ErrorCode::BadMagic, path.string());
    if (bytes.size() < kHeaderBytes) throw Error(ErrorCode::Corrupt, "truncated header");
    const auto version = get_le<std::uint32_t>(&bytes[4]);
    if (version != EmbeddingStore::kFormatVersion)
        throw Error(ErrorCode::VersionMismatch, fmt::format("file version {}, supported {}", version, EmbeddingStore::kFormatVersion));

    EmbeddingStore store;
    std::size_t pos = kHeaderBytes;
    while (pos < bytes.size()) {
        const std::size_t left = bytes.size() - pos;
        if (left < kSegmentHeaderBytes) {
            if (recover) break;
            throw Error(ErrorCode::Corrupt, fmt::format("truncated segment header at byte {}", pos));
        }
        const auto tag = bytes[pos];
        const auto dim = get_le<std::uint32_t>(&bytes[pos + 1]);
        const auto count = get_le<std::uint64_t>(&bytes[pos + 5]);
        if (tag > static_cast<std::uint8_t>(Modality::Video)) throw Error(ErrorCode::Corrupt, fmt::format("modality tag {}", tag));
        auto& seg = store.segments_[tag];
        if (dim != seg.dim) throw Error(ErrorCode::Corrupt, fmt::format("{} segment with dim {}", to_string(seg.modality), dim));
        const std::uint64_t body = count * dim * 4;
        if (count > (left - kSegmentHeaderBytes) / 4 || body > left - kSegmentHeaderBytes) {
            if (recover) break;
            throw Error(ErrorCode::Corrupt, fmt::format("segment at byte {} needs {} bytes, {} remain", pos, body,
                                                        left - kSegmentHeaderBytes));
        }
        pos += kSegmentHeaderBytes;
        const std::size_t values = static_cast<std::size_t>(count) * dim;
        seg.data.reserve(seg.data.size() + values);
        for (std::size_t i = 0; i < values; ++i, pos += 4) seg.data.push_back(std::bit_cast<float>(get_le<std::uint32_t>(&bytes[pos])));
        seg.uris.resize(seg.count());
    }
    return store;
}

}  // namespace maid
