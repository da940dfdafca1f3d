#include <cmath>
#include <limits>

#include "nipp/simd/kernels.hpp"

namespace nipp::simd::scalar {
namespace {

inline double dot_entry(const double* blocks, std::size_t i, const double* query) {
    const double* base = blocks + (i / kLanes) * kBlockDoubles + (i % kLanes);
    double acc = base[0] * query[0];
    for (std::size_t d = 1; d < kDim; ++d) acc = std::fma(base[d * kLanes], query[d], acc);
    return acc;
}

}  // namespace

void similarity_scan(const double* blocks, std::size_t count, const double* query, double* out) {
    for (std::size_t i = 0; i < count; ++i) out[i] = dot_entry(blocks, i, query);
}

BestMatch best_match(const double* blocks, std::size_t count, const double* query) {
    BestMatch best{0, -std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < count; ++i) {
        const double s = dot_entry(blocks, i, query);
        if (s > best.similarity) best = {i, s};
    }
    return best;
}

}  // namespace nipp::simd::scalar
