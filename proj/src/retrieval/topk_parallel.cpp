#include <algorithm>
#include <queue>

#include <omp.h>

#include "maid/retrieval.hpp"

namespace maid::kernels {
namespace {

struct WorseOnTop {
    bool operator()(const Scored& a, const Scored& b) const noexcept { return better(a, b); }
};

using BoundedHeap = std::priority_queue<Scored, std::vector<Scored>, WorseOnTop>;

void offer(BoundedHeap& heap, std::size_t k, Scored s) {
    if (heap.size() < k) {
        heap.push(s);
    } else if (better(s, heap.top())) {
        heap.pop();
        heap.push(s);
    }
}

}  // namespace

double dot(const float* a, const float* b, std::size_t dim) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) s += double{a[i]} * double{b[i]};
    return s;
}

std::vector<Scored> topk_parallel(std::span<const float> block, std::size_t dim, std::span<const float> query,
                                  std::size_t k, int workers) {
    const std::size_t count = dim == 0 ? 0 : block.size() / dim;
    k = std::min(k, count);
    if (k == 0) return {};
    const int threads = workers > 0 ? workers : omp_get_max_threads();

    std::vector<std::vector<Scored>> partial(static_cast<std::size_t>(threads));
#pragma omp parallel num_threads(threads)
    {
        const auto t = static_cast<std::size_t>(omp_get_thread_num());
        const auto nt = static_cast<std::size_t>(omp_get_num_threads());
        const std::size_t begin = count * t / nt;
        const std::size_t end = count * (t + 1) / nt;
        BoundedHeap heap;
        for (std::size_t i = begin; i < end; ++i) offer(heap, k, {dot(&block[i * dim], query.data(), dim), i});
        auto& out = partial[t];
        out.reserve(heap.size());
        while (!heap.empty()) {
            out.push_back(heap.top());
            heap.pop();
        }
    }

    std::vector<Scored> merged;
    for (const auto& p : partial) merged.insert(merged.end(), p.begin(), p.end());
    std::partial_sort(merged.begin(), merged.begin() + static_cast<std::ptrdiff_t>(k), merged.end(), better);
    merged.resize(k);
    return merged;
}

}  // namespace maid::kernels
