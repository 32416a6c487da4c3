#include <cassert>
#include <cstdlib>
#include <string_view>

#include "rescue/kernels.hpp"

namespace rescue::kernels {

namespace {

constexpr KernelTable kScalar{Isa::scalar, &detail::window_mask_scalar, &detail::moments_scalar};
#if defined(RESCUE_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::avx2, &detail::window_mask_avx2, &detail::moments_avx2};
#endif
#if defined(RESCUE_HAVE_NEON)
constexpr KernelTable kNeon{Isa::neon, &detail::window_mask_neon, &detail::moments_neon};
#endif

const KernelTable& select() {
    const KernelTable* best = &kScalar;
    if (const KernelTable* t = table(Isa::neon)) best = t;
    if (const KernelTable* t = table(Isa::avx2)) best = t;

    if (const char* env = std::getenv("RESCUE_SIMD")) {
        const std::string_view want(env);
        for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
            if (want == isa_name(isa)) {
                if (const KernelTable* t = table(isa)) best = t;
            }
        }
    }
    return *best;
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "scalar";
}

const KernelTable* table(Isa isa) {
    switch (isa) {
        case Isa::scalar: return &kScalar;
        case Isa::avx2:
#if defined(RESCUE_HAVE_AVX2)
            if (__builtin_cpu_supports("avx2")) return &kAvx2;
#endif
            return nullptr;
        case Isa::neon:
#if defined(RESCUE_HAVE_NEON)
            return &kNeon;  // mandatory on AArch64
#else
            return nullptr;
#endif
    }
    return nullptr;
}

const KernelTable& active() {
    static const KernelTable& chosen = select();
    return chosen;
}

void window_mask(std::span<const double> xs, std::span<const double> ys, SquareWindow w,
                 std::span<std::uint8_t> out) {
    assert(xs.size() == ys.size() && out.size() >= xs.size());
    active().window_mask(xs.data(), ys.data(), xs.size(), w, out.data());
}

Moments2 moments(std::span<const double> xs, std::span<const double> ys) {
    assert(xs.size() == ys.size());
    return active().moments(xs.data(), ys.data(), xs.size());
}

}  // namespace rescue::kernels
