#include <atomic>
#include <cstdlib>
#include <string_view>

#include "nipp/simd/kernels.hpp"

namespace nipp::simd {
namespace {

// -1: no override, otherwise a KernelLevel value.
std::atomic<int> g_override{-1};

bool cpu_has_avx2() noexcept {
#if defined(NIPP_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

KernelLevel detect() noexcept {
    const char* env = std::getenv("NIPP_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") return KernelLevel::Scalar;
    return cpu_has_avx2() ? KernelLevel::Avx2 : KernelLevel::Scalar;
}

}  // namespace

std::string_view level_name(KernelLevel level) noexcept {
    switch (level) {
        case KernelLevel::Scalar: return "scalar";
        case KernelLevel::Avx2: return "avx2";
    }
    return "unknown";
}

bool level_available(KernelLevel level) noexcept {
    switch (level) {
        case KernelLevel::Scalar: return true;
        case KernelLevel::Avx2: {
            static const bool has = cpu_has_avx2();
            return has;
        }
    }
    return false;
}

KernelLevel active_level() noexcept {
    const int forced = g_override.load(std::memory_order_relaxed);
    if (forced >= 0) return static_cast<KernelLevel>(forced);
    static const KernelLevel detected = detect();
    return detected;
}

void set_level_override(std::optional<KernelLevel> level) noexcept {
    if (level && !level_available(*level)) level = KernelLevel::Scalar;
    g_override.store(level ? static_cast<int>(*level) : -1, std::memory_order_relaxed);
}

void similarity_scan(const double* blocks, std::size_t count, const double* query, double* out) {
#if defined(NIPP_HAVE_AVX2_KERNELS)
    if (active_level() == KernelLevel::Avx2) return avx2::similarity_scan(blocks, count, query, out);
#endif
    scalar::similarity_scan(blocks, count, query, out);
}

BestMatch best_match(const double* blocks, std::size_t count, const double* query) {
#if defined(NIPP_HAVE_AVX2_KERNELS)
    if (active_level() == KernelLevel::Avx2) return avx2::best_match(blocks, count, query);
#endif
    return scalar::best_match(blocks, count, query);
}

}  // namespace nipp::simd
