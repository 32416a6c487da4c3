#include "rescue/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rescue {

namespace {

void require(bool cond, const char* field) {
    if (!cond) throw std::invalid_argument(std::string("physics: invalid ") + field);
}

}  // namespace

void PhysicalParams::validate() const {
    require(std::isfinite(mass) && mass > 0, "mass");
    require(std::isfinite(gravity) && gravity > 0, "gravity");
    require(std::isfinite(arm_length) && arm_length > 0, "arm-length");
    require(std::isfinite(thrust_coeff) && thrust_coeff > 0, "thrust-coeff");
    require(std::isfinite(moment_coeff) && moment_coeff > 0, "moment-coeff");
    require(inertia.finite() && inertia.x > 0 && inertia.y > 0 && inertia.z > 0, "inertia");
    require(std::isfinite(motor_lag) && motor_lag > 0, "motor-lag");
    require(std::isfinite(rotor_speed_min) && rotor_speed_min >= 0, "rotor-min");
    require(std::isfinite(rotor_speed_max) && rotor_speed_max > rotor_speed_min, "rotor-max");
}

double PhysicalParams::hover_speed() const {
    return std::sqrt(mass * gravity / (4.0 * thrust_coeff));
}

Mat3 rotation_matrix(const Vec3& attitude) {
    const double cph = std::cos(attitude.x), sph = std::sin(attitude.x);
    const double cth = std::cos(attitude.y), sth = std::sin(attitude.y);
    const double cps = std::cos(attitude.z), sps = std::sin(attitude.z);
    Mat3 r;
    r.m = {{{cps * cth, cps * sth * sph - sps * cph, cps * sth * cph + sps * sph},
            {sps * cth, sps * sth * sph + cps * cph, sps * sth * cph - cps * sph},
            {-sth, cth * sph, cth * cph}}};
    return r;
}

Wrench mix_forward(const RotorSpeeds& omegas, const PhysicalParams& params) {
    std::array<double, 4> f{};
    std::array<double, 4> m{};
    for (std::size_t i = 0; i < 4; ++i) {
        const double w2 = omegas.omega[i] * omegas.omega[i];
        f[i] = params.thrust_coeff * w2;
        m[i] = params.moment_coeff * w2;
    }
    return Wrench{
        f[0] + f[1] + f[2] + f[3],
        params.arm_length * (f[1] - f[3]),
        params.arm_length * (f[2] - f[0]),
        m[0] - m[1] + m[2] - m[3],
    };
}

MixResult mix_inverse(const Wrench& desired, const PhysicalParams& params) {
    // Per-rotor thrusts from the closed-form inverse of the mixing matrix.
    const double yaw_term = desired.u4 * params.thrust_coeff / params.moment_coeff;
    const double pair13 = 0.25 * (desired.u1 + yaw_term);
    const double pair24 = 0.25 * (desired.u1 - yaw_term);
    const double roll = desired.u2 / (2.0 * params.arm_length);
    const double pitch = desired.u3 / (2.0 * params.arm_length);
    const std::array<double, 4> thrust{pair13 - pitch, pair24 + roll, pair13 + pitch, pair24 - roll};

    MixResult out;
    const double lo = params.rotor_speed_min;
    const double hi = params.rotor_speed_max;
    for (std::size_t i = 0; i < 4; ++i) {
        double w2 = thrust[i] / params.thrust_coeff;
        if (!(w2 >= lo * lo)) {  // also catches NaN
            w2 = lo * lo;
            out.saturated = true;
        }
        double w = std::sqrt(w2);
        if (w > hi) {
            w = hi;
            out.saturated = true;
        }
        out.speeds.omega[i] = w;
    }
    return out;
}

StepResult step(const RigidState& state, const RotorSpeeds& commanded, const RotorSpeeds& actual,
                const Disturbance& dist, const PhysicalParams& params, double dt) {
    StepResult out;

    for (std::size_t i = 0; i < 4; ++i) {
        const double w = actual.omega[i];
        out.rotors.omega[i] = w + params.motor_lag * dt * (commanded.omega[i] - w);
    }
    const Wrench wrench = mix_forward(out.rotors, params);

    const Mat3 r = rotation_matrix(state.attitude);
    const Vec3 thrust_world = r * Vec3{0.0, 0.0, wrench.u1};
    const Vec3 accel =
        (thrust_world + dist.force) / params.mass - Vec3{0.0, 0.0, params.gravity};

    // Euler's equations, diagonal inertia.
    const Vec3& w = state.body_rates;
    const Vec3& inertia = params.inertia;
    const Vec3 rate_dot{
        (wrench.u2 + (inertia.y - inertia.z) * w.y * w.z) / inertia.x,
        (wrench.u3 + (inertia.z - inertia.x) * w.z * w.x) / inertia.y,
        (wrench.u4 + (inertia.x - inertia.y) * w.x * w.y) / inertia.z,
    };

    RigidState& next = out.state;
    next.velocity = state.velocity + accel * dt;
    next.body_rates = state.body_rates + rate_dot * dt;

    // Body rates -> Euler angle rates at the current attitude.
    const double sph = std::sin(state.attitude.x), cph = std::cos(state.attitude.x);
    const double cth = std::cos(state.attitude.y), tth = std::tan(state.attitude.y);
    const Vec3& nw = next.body_rates;
    const Vec3 euler_dot{
        nw.x + sph * tth * nw.y + cph * tth * nw.z,
        cph * nw.y - sph * nw.z,
        (sph * nw.y + cph * nw.z) / cth,
    };

    next.position = state.position + next.velocity * dt;
    next.attitude = state.attitude + euler_dot * dt;
    next.attitude.z = wrap_angle(next.attitude.z);

    out.fault = !next.finite();
    return out;
}

}  // namespace rescue
