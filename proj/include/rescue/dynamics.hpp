#pragma once

// Rigid-body quadrotor model: rotor speeds -> thrust/moments -> Newton-Euler
// integration at a fixed timestep.
//
// Frames: world is z-up; attitude is ZYX Euler (yaw psi, then pitch theta,
// then roll phi), body-to-world.
//
// Rotor layout ("+" configuration):
//   rotor 1 on body +x, rotor 3 on body -x   (spin one way)
//   rotor 2 on body +y, rotor 4 on body -y   (spin the other way)

#include <array>

#include "rescue/vec.hpp"

namespace rescue {

struct PhysicalParams {
    double mass = 0.5;              // kg
    double gravity = 9.81;          // m/s^2
    double arm_length = 0.20;       // m, hub to body center
    double thrust_coeff = 6.11e-8;  // N/rpm^2
    double moment_coeff = 1.5e-9;   // N*m/rpm^2
    Vec3 inertia{2.32e-3, 2.32e-3, 4.00e-3};  // kg*m^2, diagonal
    double motor_lag = 20.0;        // 1/s
    double rotor_speed_min = 1200.0;  // rpm
    double rotor_speed_max = 7800.0;  // rpm

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    /// Rotor speed at which total thrust balances weight, sqrt(m*g / (4*k_F)).
    [[nodiscard]] double hover_speed() const;

    bool operator==(const PhysicalParams&) const = default;
};

struct RigidState {
    Vec3 position;    // m, world
    Vec3 velocity;    // m/s, world
    Vec3 attitude;    // rad, (phi, theta, psi)
    Vec3 body_rates;  // rad/s, (p, q, r)

    [[nodiscard]] bool finite() const {
        return position.finite() && velocity.finite() && attitude.finite() && body_rates.finite();
    }
    bool operator==(const RigidState&) const = default;
};

struct RotorSpeeds {
    std::array<double, 4> omega{};  // rpm

    static RotorSpeeds uniform(double w) { return {{w, w, w, w}}; }
    bool operator==(const RotorSpeeds&) const = default;
};

struct Wrench {
    double u1 = 0.0;  // N, collective thrust along body z
    double u2 = 0.0;  // N*m, roll
    double u3 = 0.0;  // N*m, pitch
    double u4 = 0.0;  // N*m, yaw
    bool operator==(const Wrench&) const = default;
};

/// Constant world-frame external force (wind, jet-wash). Zero by default.
struct Disturbance {
    Vec3 force;
};

struct MixResult {
    RotorSpeeds speeds;
    bool saturated = false;  // at least one rotor was clamped
};

struct StepResult {
    RigidState state;
    RotorSpeeds rotors;  // lagged actual speeds after the step
    bool fault = false;  // non-finite result; caller decides consequence
};

/// ZYX body-to-world rotation R = Rz(psi) * Ry(theta) * Rx(phi).
Mat3 rotation_matrix(const Vec3& attitude);

Wrench mix_forward(const RotorSpeeds& omegas, const PhysicalParams& params);

/// Inverse of mix_forward. Negative squared speeds clamp to the floor; all
/// speeds clamp to [rotor_speed_min, rotor_speed_max].
MixResult mix_inverse(const Wrench& desired, const PhysicalParams& params);

/// One semi-implicit Euler step. Order: motor lag, wrench from lagged speeds,
/// rates/velocity update, then angles/position from the new rates/velocity.
StepResult step(const RigidState& state, const RotorSpeeds& commanded, const RotorSpeeds& actual,
                const Disturbance& dist, const PhysicalParams& params, double dt);

}  // namespace rescue
