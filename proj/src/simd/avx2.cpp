// Compiled with -mavx2 -mfma. Keep this translation unit free of inline library
// code so no AVX instructions leak into shared template instantiations.

#include <immintrin.h>

#include "nipp/simd/kernels.hpp"

namespace nipp::simd::avx2 {
namespace {

inline __m256d dot_block(const double* block, const __m256d* q) {
    __m256d acc = _mm256_mul_pd(_mm256_loadu_pd(block), q[0]);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(block + 1 * kLanes), q[1], acc);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(block + 2 * kLanes), q[2], acc);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(block + 3 * kLanes), q[3], acc);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(block + 4 * kLanes), q[4], acc);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(block + 5 * kLanes), q[5], acc);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(block + 6 * kLanes), q[6], acc);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(block + 7 * kLanes), q[7], acc);
    return acc;
}

inline void broadcast_query(const double* query, __m256d* q) {
    for (std::size_t d = 0; d < kDim; ++d) q[d] = _mm256_set1_pd(query[d]);
}

struct LaneBest {
    __m256d sim;
    __m256d idx;
};

inline void update(LaneBest& best, __m256d sims, __m256d idx) {
    const __m256d better = _mm256_cmp_pd(sims, best.sim, _CMP_GT_OQ);
    best.sim = _mm256_blendv_pd(best.sim, sims, better);
    best.idx = _mm256_blendv_pd(best.idx, idx, better);
}

}  // namespace

void similarity_scan(const double* blocks, std::size_t count, const double* query, double* out) {
    __m256d q[kDim];
    broadcast_query(query, q);
    const std::size_t full = count / kLanes;
    std::size_t b = 0;
    for (; b + 1 < full; b += 2) {
        const __m256d s0 = dot_block(blocks + b * kBlockDoubles, q);
        const __m256d s1 = dot_block(blocks + (b + 1) * kBlockDoubles, q);
        _mm256_storeu_pd(out + b * kLanes, s0);
        _mm256_storeu_pd(out + (b + 1) * kLanes, s1);
    }
    for (; b < full; ++b) _mm256_storeu_pd(out + b * kLanes, dot_block(blocks + b * kBlockDoubles, q));
    const std::size_t tail = count - full * kLanes;
    if (tail > 0) {
        alignas(32) double tmp[kLanes];
        _mm256_store_pd(tmp, dot_block(blocks + full * kBlockDoubles, q));
        for (std::size_t i = 0; i < tail; ++i) out[full * kLanes + i] = tmp[i];
    }
}

BestMatch best_match(const double* blocks, std::size_t count, const double* query) {
    __m256d q[kDim];
    broadcast_query(query, q);
    const __m256d neg_inf = _mm256_set1_pd(-__builtin_inf());
    LaneBest even{neg_inf, _mm256_setzero_pd()};
    LaneBest odd{neg_inf, _mm256_setzero_pd()};
    const __m256d stride = _mm256_set1_pd(static_cast<double>(kLanes));
    __m256d idx = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);

    const std::size_t full = count / kLanes;
    std::size_t b = 0;
    for (; b + 1 < full; b += 2) {
        const __m256d s0 = dot_block(blocks + b * kBlockDoubles, q);
        const __m256d s1 = dot_block(blocks + (b + 1) * kBlockDoubles, q);
        update(even, s0, idx);
        idx = _mm256_add_pd(idx, stride);
        update(odd, s1, idx);
        idx = _mm256_add_pd(idx, stride);
    }
    for (; b < full; ++b) {
        update(even, dot_block(blocks + b * kBlockDoubles, q), idx);
        idx = _mm256_add_pd(idx, stride);
    }

    alignas(32) double sims[2 * kLanes];
    alignas(32) double ids[2 * kLanes];
    _mm256_store_pd(sims, even.sim);
    _mm256_store_pd(sims + kLanes, odd.sim);
    _mm256_store_pd(ids, even.idx);
    _mm256_store_pd(ids + kLanes, odd.idx);

    BestMatch best{0, -__builtin_inf()};
    bool found = false;
    for (std::size_t l = 0; l < 2 * kLanes; ++l) {
        const auto i = static_cast<std::size_t>(ids[l]);
        if (!(sims[l] > -__builtin_inf())) continue;
        if (!found || sims[l] > best.similarity || (sims[l] == best.similarity && i < best.index)) {
            best = {i, sims[l]};
            found = true;
        }
    }

    const std::size_t tail = count - full * kLanes;
    if (tail > 0) {
        alignas(32) double tmp[kLanes];
        _mm256_store_pd(tmp, dot_block(blocks + full * kBlockDoubles, q));
        for (std::size_t i = 0; i < tail; ++i) {
            if (tmp[i] > best.similarity) best = {full * kLanes + i, tmp[i]};
        }
    }
    return best;
}

}  // namespace nipp::simd::avx2
