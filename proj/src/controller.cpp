#include "rescue/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rescue {

namespace {

bool non_negative(const Vec3& v) { return v.finite() && v.x >= 0 && v.y >= 0 && v.z >= 0; }

}  // namespace

void Gains::validate() const {
    if (!non_negative(kp_pos)) throw std::invalid_argument("gains: invalid kp-pos");
    if (!non_negative(kd_pos)) throw std::invalid_argument("gains: invalid kd-pos");
    if (!non_negative(kp_att)) throw std::invalid_argument("gains: invalid kp-att");
    if (!non_negative(kd_att)) throw std::invalid_argument("gains: invalid kd-att");
    if (!(max_tilt > 0 && max_tilt < kPi / 2)) throw std::invalid_argument("gains: invalid max-tilt");
}

AccelCommand desired_acceleration(const RigidState& state, const Reference& ref, const Gains& gains) {
    return {ref.acceleration + hadamard(gains.kd_pos, ref.velocity - state.velocity) +
            hadamard(gains.kp_pos, ref.position - state.position)};
}

AttitudeSetpoint position_control(const RigidState& state, const Reference& ref, const Gains& gains,
                                  const PhysicalParams& params) {
    const Vec3 da = desired_acceleration(state, ref, gains).delta_a;
    const double g = params.gravity;
    const double s = std::sin(ref.yaw);
    const double c = std::cos(ref.yaw);

    AttitudeSetpoint sp;
    sp.thrust = std::max(0.0, params.mass * (g + da.z));
    sp.phi_des = std::clamp((da.x * s - da.y * c) / g, -gains.max_tilt, gains.max_tilt);
    sp.theta_des = std::clamp((da.x * c + da.y * s) / g, -gains.max_tilt, gains.max_tilt);
    sp.psi_des = ref.yaw;
    return sp;
}

Wrench attitude_control(const RigidState& state, const AttitudeSetpoint& sp, const Gains& gains,
                        const PhysicalParams& params) {
    const double e_phi = sp.phi_des - state.attitude.x;
    const double e_theta = sp.theta_des - state.attitude.y;
    const double e_psi = wrap_angle(sp.psi_des - state.attitude.z);
    const Vec3& w = state.body_rates;
    const Vec3& inertia = params.inertia;
    return Wrench{
        sp.thrust,
        inertia.x * (gains.kp_att.x * e_phi - gains.kd_att.x * w.x),
        inertia.y * (gains.kp_att.y * e_theta - gains.kd_att.y * w.y),
        inertia.z * (gains.kp_att.z * e_psi - gains.kd_att.z * w.z),
    };
}

ControlOutput control_step(const RigidState& state, const Reference& ref, const Gains& gains,
                           const PhysicalParams& params) {
    ControlOutput out;
    out.setpoint = position_control(state, ref, gains, params);
    out.wrench = attitude_control(state, out.setpoint, gains, params);
    const MixResult mixed = mix_inverse(out.wrench, params);
    out.rotors = mixed.speeds;
    out.saturated = mixed.saturated;
    return out;
}

}  // namespace rescue
