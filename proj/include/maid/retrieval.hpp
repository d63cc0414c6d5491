#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "maid/fingerprint.hpp"
#include "maid/modality.hpp"

namespace maid {

struct Hit {
    std::string uri;
    double score = 0.0;
    std::size_t index = 0;  // insertion index within the modality segment
};

/// Ranked best first; equal scores keep insertion order.
using QueryResult = std::vector<Hit>;

namespace kernels {

struct Scored {
    double score;
    std::size_t index;
};

/// Ranking used everywhere: higher score first, then lower index.
inline bool better(const Scored& a, const Scored& b) noexcept {
    return a.score > b.score || (a.score == b.score && a.index < b.index);
}

/// Exact top-k over a row-major block of `count` vectors. The scan is split
/// into contiguous slices across `workers` OpenMP threads (0 = runtime
/// default); per-slice winners are merged, so the result equals the serial
/// scan for any worker count.
std::vector<Scored> topk_parallel(std::span<const float> block, std::size_t dim, std::span<const float> query,
                                  std::size_t k, int workers = 0);

/// Single-threaded reference: score everything, sort, truncate.
std::vector<Scored> topk_reference(std::span<const float> block, std::size_t dim, std::span<const float> query,
                                   std::size_t k);

double dot(const float* a, const float* b, std::size_t dim) noexcept;

}  // namespace kernels

/// Append-only vector index with one contiguous segment per modality.
///
/// Readers share a lock for the whole query, so a query sees the store as it
/// was when the query began; put() and truncate() take the lock exclusively.
class EmbeddingStore {
public:
    static constexpr std::uint32_t kFormatVersion = 1;
    static constexpr std::size_t kDefaultCapacity = std::size_t{1} << 28;

    struct Segment {
        Modality modality = Modality::Text;
        std::uint32_t dim = 0;
        std::vector<float> data;        // count * dim
        std::vector<std::string> uris;  // aligned with rows; empty strings when loaded without a sidecar
        std::size_t count() const noexcept { return dim == 0 ? 0 : data.size() / dim; }
    };

    explicit EmbeddingStore(std::size_t capacity_per_segment = kDefaultCapacity);
    EmbeddingStore(const EmbeddingStore& other);
    EmbeddingStore& operator=(const EmbeddingStore& other);
    ~EmbeddingStore();

    /// Returns the new row's index (the previous count). Throws DimMismatch
    /// or StoreFull; with a journal attached the row is appended to disk
    /// before the call returns (PersistFailure on write errors).
    std::size_t put(const std::string& uri, const Embedding& e);
    std::size_t put(Modality m, const std::string& uri, std::span<const float> values);

    /// Throws EmptySegment when the query's modality has no rows.
    QueryResult topk(const Embedding& query, std::size_t k, int workers = 0) const;

    std::size_t count(Modality m) const;
    std::vector<float> vector(Modality m, std::size_t index) const;
    std::string uri(Modality m, std::size_t index) const;
    void set_uri(Modality m, std::size_t index, std::string uri);
    /// Drops rows at and beyond `count` (crash recovery).
    void truncate(Modality m, std::size_t count);

    /// Copy of one segment under the read lock.
    Segment segment(Modality m) const;

    /// Appends each future put() to `path`, writing a header first if the
    /// file is empty or missing.
    void attach_journal(const std::filesystem::path& path);

    /// Vectors and insertion order, bit for bit (uris are not compared).
    bool same_vectors(const EmbeddingStore& other) const;

private:
    friend void save_store(const EmbeddingStore& store, const std::filesystem::path& path);
    friend EmbeddingStore load_store(const std::filesystem::path& path, bool recover);

    mutable std::shared_mutex mutex_;
    std::array<Segment, 4> segments_;
    std::size_t capacity_;
    std::unique_ptr<std::ofstream> journal_;
};

/// Vector file: "URIX", u32 version, then segments of
/// {u8 modality, u32 dim, u64 count, count*dim f32}, all little-endian.
/// Segments of the same modality may repeat (journal appends) and are
/// concatenated in file order. save_store writes one segment per modality,
/// via a temporary file renamed into place.
void save_store(const EmbeddingStore& store, const std::filesystem::path& path);
/// Throws Io, BadMagic, VersionMismatch or Corrupt. With `recover`, a
/// truncated trailing segment is dropped instead of raising Corrupt.
EmbeddingStore load_store(const std::filesystem::path& path, bool recover = false);

struct PcaResult {
    std::vector<std::array<double, 2>> coords;   // n rows
    std::array<double, 2> explained{};           // eigenvalues of the covariance
    std::array<std::vector<double>, 2> components;
    std::vector<double> mean;
    std::array<int, 2> iterations{};
};

struct PcaOptions {
    double tolerance = 1e-10;
    int max_iterations = 1000;
    std::uint64_t seed = 0x5eed;
};

/// Top-2 principal components by power iteration with deflation on the
/// sample covariance (divisor n-1). Each component's largest-magnitude entry
/// is made positive. Requires n >= 3 and d >= 2; throws DegenerateData when
/// every row is identical.
PcaResult pca_project(std::span<const double> rows, std::size_t n, std::size_t d, const PcaOptions& options = {});

}  // namespace maid
