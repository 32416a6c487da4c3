// AArch64 variant. Two float64x2 registers stand in for the four reference
// lanes: lo holds lanes 0,1 and hi holds lanes 2,3.

#include <arm_neon.h>

#include <array>

#include "rescue/kernels.hpp"

namespace rescue::kernels::detail {

namespace {

inline std::array<double, 4> lanes(float64x2_t lo, float64x2_t hi) {
    std::array<double, 4> out;
    vst1q_f64(out.data(), lo);
    vst1q_f64(out.data() + 2, hi);
    return out;
}

inline double reduce(const std::array<double, 4>& l) { return (l[0] + l[1]) + (l[2] + l[3]); }

}  // namespace

void window_mask_neon(const double* xs, const double* ys, std::size_t n, SquareWindow w, std::uint8_t* out) {
    const float64x2_t cx = vdupq_n_f64(w.cx);
    const float64x2_t cy = vdupq_n_f64(w.cy);
    const float64x2_t half = vdupq_n_f64(w.half);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t dx = vabsq_f64(vsubq_f64(vld1q_f64(xs + i), cx));
        const float64x2_t dy = vabsq_f64(vsubq_f64(vld1q_f64(ys + i), cy));
        const uint64x2_t inside = vandq_u64(vcleq_f64(dx, half), vcleq_f64(dy, half));
        out[i + 0] = static_cast<std::uint8_t>(vgetq_lane_u64(inside, 0) & 1);
        out[i + 1] = static_cast<std::uint8_t>(vgetq_lane_u64(inside, 1) & 1);
    }
    if (i < n) window_mask_scalar(xs + i, ys + i, n - i, w, out + i);
}

Moments2 moments_neon(const double* xs, const double* ys, std::size_t n) {
    Moments2 m;
    m.n = n;
    if (n == 0) return m;
    const std::size_t body = n & ~std::size_t{3};

    float64x2_t sx_lo = vdupq_n_f64(0.0), sx_hi = vdupq_n_f64(0.0);
    float64x2_t sy_lo = vdupq_n_f64(0.0), sy_hi = vdupq_n_f64(0.0);
    for (std::size_t i = 0; i < body; i += 4) {
        sx_lo = vaddq_f64(sx_lo, vld1q_f64(xs + i));
        sx_hi = vaddq_f64(sx_hi, vld1q_f64(xs + i + 2));
        sy_lo = vaddq_f64(sy_lo, vld1q_f64(ys + i));
        sy_hi = vaddq_f64(sy_hi, vld1q_f64(ys + i + 2));
    }
    auto lx = lanes(sx_lo, sx_hi);
    auto ly = lanes(sy_lo, sy_hi);
    for (std::size_t i = body; i < n; ++i) {
        lx[i & 3] += xs[i];
        ly[i & 3] += ys[i];
    }
    const double count = static_cast<double>(n);
    m.mean_x = reduce(lx) / count;
    m.mean_y = reduce(ly) / count;

    const float64x2_t mx = vdupq_n_f64(m.mean_x);
    const float64x2_t my = vdupq_n_f64(m.mean_y);
    float64x2_t xx_lo = vdupq_n_f64(0.0), xx_hi = vdupq_n_f64(0.0);
    float64x2_t xy_lo = vdupq_n_f64(0.0), xy_hi = vdupq_n_f64(0.0);
    float64x2_t yy_lo = vdupq_n_f64(0.0), yy_hi = vdupq_n_f64(0.0);
    for (std::size_t i = 0; i < body; i += 4) {
        const float64x2_t dx_lo = vsubq_f64(vld1q_f64(xs + i), mx);
        const float64x2_t dx_hi = vsubq_f64(vld1q_f64(xs + i + 2), mx);
        const float64x2_t dy_lo = vsubq_f64(vld1q_f64(ys + i), my);
        const float64x2_t dy_hi = vsubq_f64(vld1q_f64(ys + i + 2), my);
        // vmulq + vaddq rather than vfmaq: the reference rounds twice.
        xx_lo = vaddq_f64(xx_lo, vmulq_f64(dx_lo, dx_lo));
        xx_hi = vaddq_f64(xx_hi, vmulq_f64(dx_hi, dx_hi));
        xy_lo = vaddq_f64(xy_lo, vmulq_f64(dx_lo, dy_lo));
        xy_hi = vaddq_f64(xy_hi, vmulq_f64(dx_hi, dy_hi));
        yy_lo = vaddq_f64(yy_lo, vmulq_f64(dy_lo, dy_lo));
        yy_hi = vaddq_f64(yy_hi, vmulq_f64(dy_hi, dy_hi));
    }
    auto lxx = lanes(xx_lo, xx_hi);
    auto lxy = lanes(xy_lo, xy_hi);
    auto lyy = lanes(yy_lo, yy_hi);
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
