#pragma once

// Data-parallel inner loops with a scalar reference and SIMD variants.
//
// Every variant is bit-identical to the scalar reference: comparisons are
// exact, and reductions use a fixed 4-lane accumulation order (lane j takes
// elements 4k+j, lanes combine as (l0+l1)+(l2+l3)) that the scalar code
// reproduces. That keeps snapshot streams identical regardless of which
// variant the host selects.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace rescue::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

/// Axis-aligned closed square |x - cx| <= half && |y - cy| <= half.
struct SquareWindow {
    double cx = 0.0;
    double cy = 0.0;
    double half = 0.0;
};

/// Centered second moments of a 2-D point set.
struct Moments2 {
    std::size_t n = 0;
    double mean_x = 0.0;
    double mean_y = 0.0;
    double sxx = 0.0;  // sum of (x - mean_x)^2
    double sxy = 0.0;
    double syy = 0.0;

    bool operator==(const Moments2&) const = default;
};

using WindowMaskFn = void (*)(const double* xs, const double* ys, std::size_t n, SquareWindow w,
                              std::uint8_t* out);
using MomentsFn = Moments2 (*)(const double* xs, const double* ys, std::size_t n);

struct KernelTable {
    Isa isa;
    WindowMaskFn window_mask;
    MomentsFn moments;
};

/// Variant for `isa`, or nullptr when it is not compiled in or the CPU lacks it.
const KernelTable* table(Isa isa);

/// Best supported variant, chosen once. RESCUE_SIMD=scalar|avx2|neon overrides
/// when the requested variant is available.
const KernelTable& active();

void window_mask(std::span<const double> xs, std::span<const double> ys, SquareWindow w,
                 std::span<std::uint8_t> out);
Moments2 moments(std::span<const double> xs, std::span<const double> ys);

namespace detail {
// Per-ISA entry points; defined in src/kernels/*.cpp.
void window_mask_scalar(const double* xs, const double* ys, std::size_t n, SquareWindow w, std::uint8_t* out);
Moments2 moments_scalar(const double* xs, const double* ys, std::size_t n);
#if defined(RESCUE_HAVE_AVX2)
void window_mask_avx2(const double* xs, const double* ys, std::size_t n, SquareWindow w, std::uint8_t* out);
Moments2 moments_avx2(const double* xs, const double* ys, std::size_t n);
#endif
#if defined(RESCUE_HAVE_NEON)
void window_mask_neon(const double* xs, const double* ys, std::size_t n, SquareWindow w, std::uint8_t* out);
Moments2 moments_neon(const double* xs, const double* ys, std::size_t n);
#endif
}  // namespace detail

}  // namespace rescue::kernels
