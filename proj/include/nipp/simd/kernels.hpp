#pragma once

// Similarity kernels over unit embeddings stored in lane-interleaved blocks.
//
// Block layout: entries are grouped in blocks of kLanes. Block b holds
// kDim * kLanes doubles ordered [dim][lane], so entry i lives in block i / kLanes
// at lane i % kLanes. The final block is zero padded.
//
// Every variant evaluates a dot product as mul(d0) followed by fused
// multiply-adds over d1..d7 in order, so all levels return bit-identical results.

#include <cstddef>
#include <optional>
#include <string_view>

namespace nipp::simd {

inline constexpr std::size_t kLanes = 4;
inline constexpr std::size_t kDim = 8;
inline constexpr std::size_t kBlockDoubles = kLanes * kDim;

inline constexpr std::size_t block_count(std::size_t entries) { return (entries + kLanes - 1) / kLanes; }

enum class KernelLevel { Scalar, Avx2 };

struct BestMatch {
    std::size_t index = 0;
    double similarity = 0.0;
};

std::string_view level_name(KernelLevel level) noexcept;

/// True when the level was compiled in and the running CPU supports it.
bool level_available(KernelLevel level) noexcept;

/// Level used by the dispatching entry points: the override if set, else the
/// best available level (NIPP_SIMD=scalar in the environment forces scalar).
KernelLevel active_level() noexcept;
void set_level_override(std::optional<KernelLevel> level) noexcept;

/// out[i] = <entry i, query> for i < count.
void similarity_scan(const double* blocks, std::size_t count, const double* query, double* out);

/// Entry with the largest similarity; ties go to the smallest index. count > 0.
BestMatch best_match(const double* blocks, std::size_t count, const double* query);

namespace scalar {
void similarity_scan(const double* blocks, std::size_t count, const double* query, double* out);
BestMatch best_match(const double* blocks, std::size_t count, const double* query);
}  // namespace scalar

namespace avx2 {
void similarity_scan(const double* blocks, std::size_t count, const double* query, double* out);
BestMatch best_match(const double* blocks, std::size_t count, const double* query);
}  // namespace avx2

}  // namespace nipp::simd
