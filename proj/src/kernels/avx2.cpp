// Compiled with -mavx2 only (no -mfma); dispatch guarantees the CPU has AVX2
// before any of these run.

#include <immintrin.h>

#include <array>

#include "rescue/kernels.hpp"

namespace rescue::kernels::detail {

namespace {

inline __m256d abs_pd(__m256d v) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    return _mm256_andnot_pd(sign, v);
}

inline std::array<double, 4> lanes(__m256d v) {
    alignas(32) std::array<double, 4> out;
    _mm256_store_pd(out.data(), v);
    return out;
}

inline double reduce(const std::array<double, 4>& l) { return (l[0] + l[1]) + (l[2] + l[3]); }

}  // namespace

void window_mask_avx2(const double* xs, const double* ys, std::size_t n, SquareWindow w, std::uint8_t* out) {
    const __m256d cx = _mm256_set1_pd(w.cx);
    const __m256d cy = _mm256_set1_pd(w.cy);
    const __m256d half = _mm256_set1_pd(w.half);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = abs_pd(_mm256_sub_pd(_mm256_loadu_pd(xs + i), cx));
        const __m256d dy = abs_pd(_mm256_sub_pd(_mm256_loadu_pd(ys + i), cy));
        const __m256d inside = _mm256_and_pd(_mm256_cmp_pd(dx, half, _CMP_LE_OQ), _mm256_cmp_pd(dy, half, _CMP_LE_OQ));
        const int bits = _mm256_movemask_pd(inside);
        out[i + 0] = static_cast<std::uint8_t>(bits & 1);
        out[i + 1] = static_cast<std::uint8_t>((bits >> 1) & 1);
        out[i + 2] = static_cast<std::uint8_t>((bits >> 2) & 1);
        out[i + 3] = static_cast<std::uint8_t>((bits >> 3) & 1);
    }
    if (i < n) window_mask_scalar(xs + i, ys + i, n - i, w, out + i);
}

Moments2 moments_avx2(const double* xs, const double* ys, std::size_t n) {
    Moments2 m;
    m.n = n;
    if (n == 0) return m;
    const std::size_t body = n & ~std::size_t{3};

    __m256d sx = _mm256_setzero_pd();
    __m256d sy = _mm256_setzero_pd();
    for (std::size_t i = 0; i < body; i += 4) {
        sx = _mm256_add_pd(sx, _mm256_loadu_pd(xs + i));
        sy = _mm256_add_pd(sy, _mm256_loadu_pd(ys + i));
    }
    auto lx = lanes(sx);
    auto ly = lanes(sy);
    for (std::size_t i = body; i < n; ++i) {
        lx[i & 3] += xs[i];
        ly[i & 3] += ys[i];
    }
    const double count = static_cast<double>(n);
    m.mean_x = reduce(lx) / count;
    m.mean_y = reduce(ly) / count;

    const __m256d mx = _mm256_set1_pd(m.mean_x);
    const __m256d my = _mm256_set1_pd(m.mean_y);
    __m256d cxx = _mm256_setzero_pd();
    __m256d cxy = _mm256_setzero_pd();
    __m256d cyy = _mm256_setzero_pd();
    for (std::size_t i = 0; i < body; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), mx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), my);
        cxx = _mm256_add_pd(cxx, _mm256_mul_pd(dx, dx));
        cxy = _mm256_add_pd(cxy, _mm256_mul_pd(dx, dy));
        cyy = _mm256_add_pd(cyy, _mm256_mul_pd(dy, dy));
    }
    auto lxx = lanes(cxx);
    auto lxy = lanes(cxy);
    auto lyy = lanes(cyy);
    for (std::size_t i = body; i < n; ++i) {
        const double dx = xs[i] - m.mean_x;
        const double dy = ys[i] - m.mean_y;
        lxx[i & 3] += dx * dx;
        lxy[i & 3] += dx * dy;
        lyy[i & 3] += dy * dy;
    }
    m.sxx = reduce(lxx);
    m.sxy = reduce(lxy);
    m.syy = reduce(lyy);
    return m;
}

}  // namespace rescue::kernels::detail
