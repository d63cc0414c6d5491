#include <algorithm>

#include "maid/retrieval.hpp"

namespace maid::kernels {

std::vector<Scored> topk_reference(std::span<const float> block, std::size_t dim, std::span<const float> query,
                                   std::size_t k) {
    const std::size_t count = dim == 0 ? 0 : block.size() / dim;
    std::vector<Scored> all;
    all.reserve(count);
    for (std::size_t i = 0; i < count; ++i) all.push_back({dot(&block[i * dim], query.data(), dim), i});
    std::sort(all.begin(), all.end(), better);
    all.resize(std::min(k, count));
    return all;
}

}  // namespace maid::kernels
