#pragma once

// Planned-versus-actual trajectory residuals and their summaries: a sliding
// window of deviation samples, horizontal error ellipses, and a
// constant-force (wind) estimate from the steady-state PD balance.

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "rescue/controller.hpp"
#include "rescue/dynamics.hpp"
#include "rescue/result.hpp"

namespace rescue {

struct DeviationSample {
    double time = 0.0;
    Vec3 planned;
    Vec3 actual;

    [[nodiscard]] Vec3 residual() const { return actual - planned; }
    bool operator==(const DeviationSample&) const = default;
};

enum class TelemetryError { out_of_order, insufficient_samples, not_steady };

std::string_view telemetry_error_name(TelemetryError e);

/// Fixed-capacity ring of the most recent samples, time-ordered.
class DeviationBuffer {
public:
    explicit DeviationBuffer(std::size_t capacity = 100);

    /// Capacity covering `window` seconds at `rate` samples per second.
    static DeviationBuffer for_window(double window, double rate);

    /// Rejects samples older than the newest one held.
    std::optional<TelemetryError> record(const DeviationSample& s);

    [[nodiscard]] std::size_t size() const { return count_; }
    [[nodiscard]] std::size_t capacity() const { return ring_.size(); }
    [[nodiscard]] bool empty() const { return count_ == 0; }
    [[nodiscard]] const DeviationSample& latest() const;

    /// Chronological copy of the held samples.
    [[nodiscard]] std::vector<DeviationSample> window() const;

    void clear() { head_ = count_ = 0; }

private:
    std::vector<DeviationSample> ring_;
    std::size_t head_ = 0;  // index of the oldest sample
    std::size_t count_ = 0;
};

struct ErrorEllipse {
    double center_x = 0.0;  // m, mean horizontal residual
    double center_y = 0.0;
    double semi_major = 0.0;   // m
    double semi_minor = 0.0;   // m
    double orientation = 0.0;  // rad, major axis from +x, in (-pi/2, pi/2]
    double confidence = 0.95;
    double vertical_band = 0.0;  // m, half-width of the 1-D band on z residuals

    bool operator==(const ErrorEllipse&) const = default;
};

/// Chi-square quantile with 2 degrees of freedom: -2 ln(1 - p).
double chi_square_2dof_quantile(double confidence);

Result<ErrorEllipse, TelemetryError> ellipse(std::span<const DeviationSample> samples, double confidence = 0.95);

struct DisturbanceEstimate {
    Vec3 force;  // N, world frame
    std::size_t samples = 0;
    bool operator==(const DisturbanceEstimate&) const = default;
};

struct DisturbanceOptions {
    double steady_threshold = 0.05;  // m/s, mean |d residual / dt|
    bool horizontal_only = true;
};

/// F = m * kp_pos (per axis) * mean residual. Only valid in a quasi-steady
/// window, where the proportional term alone balances the external force.
Result<DisturbanceEstimate, TelemetryError> estimate_disturbance(std::span<const DeviationSample> samples,
                                                                 const Gains& gains, const PhysicalParams& params,
                                                                 const DisturbanceOptions& options = {});

struct DeviationRow {
    double time = 0.0;
    std::uint32_t uav = 0;
    Vec3 planned;
    Vec3 actual;
};

/// CSV with header t,uav,xt,yt,zt,x,y,z.
void write_deviation_csv(std::ostream& out, std::span<const DeviationRow> rows);

}  // namespace rescue
