#include "rescue/telemetry.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "rescue/format.hpp"
#include "rescue/kernels.hpp"

namespace rescue {

std::string_view telemetry_error_name(TelemetryError e) {
    switch (e) {
        case TelemetryError::out_of_order: return "out-of-order";
        case TelemetryError::insufficient_samples: return "insufficient-samples";
        case TelemetryError::not_steady: return "not-steady";
    }
    return "unknown";
}

DeviationBuffer::DeviationBuffer(std::size_t capacity) : ring_(std::max<std::size_t>(capacity, 1)) {}

DeviationBuffer DeviationBuffer::for_window(double window, double rate) {
    return DeviationBuffer(static_cast<std::size_t>(std::llround(window * rate)));
}

std::optional<TelemetryError> DeviationBuffer::record(const DeviationSample& s) {
    if (count_ > 0 && s.time < latest().time) return TelemetryError::out_of_order;
    const std::size_t cap = ring_.size();
    if (count_ < cap) {
        ring_[(head_ + count_) % cap] = s;
        ++count_;
    } else {
        ring_[head_] = s;
        head_ = (head_ + 1) % cap;
    }
    return std::nullopt;
}

const DeviationSample& DeviationBuffer::latest() const {
    assert(count_ > 0);
    return ring_[(head_ + count_ - 1) % ring_.size()];
}

std::vector<DeviationSample> DeviationBuffer::window() const {
    std::vector<DeviationSample> out;
    out.reserve(count_);
    for (std::size_t i = 0; i < count_; ++i) out.push_back(ring_[(head_ + i) % ring_.size()]);
    return out;
}

double chi_square_2dof_quantile(double confidence) { return -2.0 * std::log1p(-confidence); }

Result<ErrorEllipse, TelemetryError> ellipse(std::span<const DeviationSample> samples, double confidence) {
    if (samples.size() < 2) return TelemetryError::insufficient_samples;

    const std::size_t n = samples.size();
    std::vector<double> rx(n), ry(n);
    double sum_z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 r = samples[i].residual();
        rx[i] = r.x;
        ry[i] = r.y;
        sum_z += r.z;
    }
    const kernels::Moments2 m = kernels::moments(rx, ry);
    const double denom = static_cast<double>(n - 1);
    const double cxx = m.sxx / denom;
    const double cxy = m.sxy / denom;
    const double cyy = m.syy / denom;

    // Closed-form eigen-decomposition of the symmetric 2x2 covariance.
    const double mid = 0.5 * (cxx + cyy);
    const double half_diff = 0.5 * (cxx - cyy);
    const double radius = std::hypot(half_diff, cxy);
    const double lambda_major = mid + radius;
    const double lambda_minor = std::max(0.0, mid - radius);

    const double q = chi_square_2dof_quantile(confidence);
    ErrorEllipse e;
    e.center_x = m.mean_x;
    e.center_y = m.mean_y;
    e.semi_major = std::sqrt(lambda_major * q);
    e.semi_minor = std::sqrt(lambda_minor * q);
    e.orientation = 0.5 * std::atan2(2.0 * cxy, cxx - cyy);
    e.confidence = confidence;

    const double mean_z = sum_z / static_cast<double>(n);
    double szz = 0.0;
    for (const DeviationSample& s : samples) {
        const double dz = s.residual().z - mean_z;
        szz += dz * dz;
    }
    const boost::math::normal_distribution<double> unit;
    const double z_quantile = boost::math::quantile(unit, 0.5 * (1.0 + confidence));
    e.vertical_band = z_quantile * std::sqrt(szz / denom);
    return e;
}

Result<DisturbanceEstimate, TelemetryError> estimate_disturbance(std::span<const DeviationSample> samples,
                                                                 const Gains& gains, const PhysicalParams& params,
                                                                 const DisturbanceOptions& options) {
    if (samples.size() < 2) return TelemetryError::insufficient_samples;

    double rate_sum = 0.0;
    Vec3 residual_sum = samples.front().residual();
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const double dt = samples[i].time - samples[i - 1].time;
        const Vec3 r = samples[i].residual();
        if (dt > 0.0) rate_sum += (r - samples[i - 1].residual()).norm() / dt;
        residual_sum += r;
    }
    const double mean_rate = rate_sum / static_cast<double>(samples.size() - 1);
    if (!(mean_rate < options.steady_threshold)) return TelemetryError::not_steady;

    const Vec3 mean_residual = residual_sum / static_cast<double>(samples.size());
    DisturbanceEstimate est;
    est.force = hadamard(gains.kp_pos, mean_residual) * params.mass;
    if (options.horizontal_only) est.force.z = 0.0;
    est.samples = samples.size();
    return est;
}

void write_deviation_csv(std::ostream& out, std::span<const DeviationRow> rows) {
    std::string line;
    out << "t,uav,xt,yt,zt,x,y,z\n";
    for (const DeviationRow& r : rows) {
        line.clear();
        append_number(line, r.time);
        line += ',';
        line += std::to_string(r.uav);
        for (double v : {r.planned.x, r.planned.y, r.planned.z, r.actual.x, r.actual.y, r.actual.z}) {
            line += ',';
            append_number(line, v);
        }
        line += '\n';
        out << line;
    }
}

}  // namespace rescue
