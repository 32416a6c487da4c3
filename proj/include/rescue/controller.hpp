#pragma once

// Two-loop PD controller. Outer loop: position/velocity error plus
// feedforward acceleration -> desired acceleration -> thrust and small-angle
// attitude setpoint. Inner loop: attitude error and body-rate damping ->
// body moments. Moments and thrust go through the inverse mixer.

#include "rescue/dynamics.hpp"
#include "rescue/vec.hpp"

namespace rescue {

struct Gains {
    Vec3 kp_pos{4.0, 4.0, 8.0};     // 1/s^2
    Vec3 kd_pos{3.5, 3.5, 5.0};     // 1/s
    Vec3 kp_att{250.0, 250.0, 20.0};  // 1/s^2
    Vec3 kd_att{30.0, 30.0, 8.0};    // 1/s
    double max_tilt = 0.5;          // rad

    void validate() const;
    bool operator==(const Gains&) const = default;
};

/// Time-parameterized reference sample fed to the outer loop.
struct Reference {
    Vec3 position;
    Vec3 velocity;
    Vec3 acceleration;
    double yaw = 0.0;

    bool operator==(const Reference&) const = default;
};

struct AccelCommand {
    Vec3 delta_a;
};

struct AttitudeSetpoint {
    double phi_des = 0.0;
    double theta_des = 0.0;
    double psi_des = 0.0;
    double thrust = 0.0;  // N
};

struct ControlOutput {
    RotorSpeeds rotors;
    AttitudeSetpoint setpoint;
    Wrench wrench;  // requested, before mixer clamping
    bool saturated = false;
};

AccelCommand desired_acceleration(const RigidState& state, const Reference& ref, const Gains& gains);

AttitudeSetpoint position_control(const RigidState& state, const Reference& ref, const Gains& gains,
                                  const PhysicalParams& params);

Wrench attitude_control(const RigidState& state, const AttitudeSetpoint& sp, const Gains& gains,
                        const PhysicalParams& params);

ControlOutput control_step(const RigidState& state, const Reference& ref, const Gains& gains,
                           const PhysicalParams& params);

}  // namespace rescue
