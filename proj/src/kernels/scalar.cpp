#include <array>
#include <cmath>

#include "rescue/kernels.hpp"

namespace rescue::kernels::detail {

void window_mask_scalar(const double* xs, const double* ys, std::size_t n, SquareWindow w, std::uint8_t* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::fabs(xs[i] - w.cx);
        const double dy = std::fabs(ys[i] - w.cy);
        out[i] = (dx <= w.half && dy <= w.half) ? 1 : 0;
    }
}

// Emulates the 4-lane accumulation of the vector variants exactly.
Moments2 moments_scalar(const double* xs, const double* ys, std::size_t n) {
    Moments2 m;
    m.n = n;
    if (n == 0) return m;

    std::array<double, 4> sx{}, sy{};
    for (std::size_t i = 0; i < n; ++i) {
        sx[i & 3] += xs[i];
        sy[i & 3] += ys[i];
    }
    const double count = static_cast<double>(n);
    m.mean_x = ((sx[0] + sx[1]) + (sx[2] + sx[3])) / count;
    m.mean_y = ((sy[0] + sy[1]) + (sy[2] + sy[3])) / count;

    std::array<double, 4> cxx{}, cxy{}, cyy{};
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - m.mean_x;
        const double dy = ys[i] - m.mean_y;
        cxx[i & 3] += dx * dx;
        cxy[i & 3] += dx * dy;
        cyy[i & 3] += dy * dy;
    }
    m.sxx = (cxx[0] + cxx[1]) + (cxx[2] + cxx[3]);
    m.sxy = (cxy[0] + cxy[1]) + (cxy[2] + cxy[3]);
    m.syy = (cyy[0] + cyy[1]) + (cyy[2] + cyy[3]);
    return m;
}

}  // namespace rescue::kernels::detail
