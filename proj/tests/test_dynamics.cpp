#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "rescue/dynamics.hpp"

using namespace rescue;

namespace {

constexpr double kDt = 1.0 / 60.0;

// Mixing matrix written out term by term, independent of mix_forward.
Wrench oracle_wrench(const RotorSpeeds& w, const PhysicalParams& p) {
    const double s1 = w.omega[0] * w.omega[0], s2 = w.omega[1] * w.omega[1];
    const double s3 = w.omega[2] * w.omega[2], s4 = w.omega[3] * w.omega[3];
    return {p.thrust_coeff * (s1 + s2 + s3 + s4), p.arm_length * p.thrust_coeff * (s2 - s4),
            p.arm_length * p.thrust_coeff * (s3 - s1), p.moment_coeff * (s1 - s2 + s3 - s4)};
}

}  // namespace

TEST(Dynamics, HoverSpeedFromWeightBalance) {
    const PhysicalParams p;
    // sqrt(0.5 * 9.81 / (4 * 6.11e-8)) rpm
    EXPECT_NEAR(p.hover_speed(), 4479.906, 1e-3);
    EXPECT_NEAR(4.0 * p.thrust_coeff * p.hover_speed() * p.hover_speed(), p.mass * p.gravity, 1e-12);
    EXPECT_GT(p.hover_speed(), p.rotor_speed_min);
    EXPECT_LT(p.hover_speed(), p.rotor_speed_max);
}

TEST(Dynamics, ValidateNamesTheField) {
    PhysicalParams p;
    p.mass = 0.0;
    try {
        p.validate();
        FAIL() << "expected invalid_argument";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("mass"), std::string::npos);
    }
    p = {};
    p.rotor_speed_min = 9000.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    EXPECT_NO_THROW(PhysicalParams{}.validate());
}

TEST(Dynamics, RotationMatrixIsProperOrthonormal) {
    const Vec3 att{0.3, -0.2, 1.1};
    const Mat3 r = rotation_matrix(att);
    const Mat3 rtr = r.transposed() * r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(rtr.m[i][j], i == j ? 1.0 : 0.0, 1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);

    // Positive pitch tilts body z toward world +x; positive roll toward world -y.
    const Vec3 zp = rotation_matrix({0.0, 0.1, 0.0}) * Vec3{0, 0, 1};
    EXPECT_NEAR(zp.x, std::sin(0.1), 1e-15);
    const Vec3 zr = rotation_matrix({0.1, 0.0, 0.0}) * Vec3{0, 0, 1};
    EXPECT_NEAR(zr.y, -std::sin(0.1), 1e-15);
}

TEST(Dynamics, MixForwardMatchesMatrix) {
    const PhysicalParams p;
    const RotorSpeeds w{{4000.0, 4500.0, 5000.0, 3900.0}};
    const Wrench got = mix_forward(w, p);
    const Wrench want = oracle_wrench(w, p);
    EXPECT_NEAR(got.u1, want.u1, 1e-12);
    EXPECT_NEAR(got.u2, want.u2, 1e-15);
    EXPECT_NEAR(got.u3, want.u3, 1e-15);
    EXPECT_NEAR(got.u4, want.u4, 1e-15);
}

TEST(Dynamics, MixInverseRoundTrips) {
    const PhysicalParams p;
    const RotorSpeeds w{{4100.0, 4700.0, 5200.0, 3600.0}};
    const MixResult back = mix_inverse(oracle_wrench(w, p), p);
    EXPECT_FALSE(back.saturated);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(back.speeds.omega[i], w.omega[i], 1e-6);
}

TEST(Dynamics, MixInverseClampsAndFlags) {
    const PhysicalParams p;
    MixResult low = mix_inverse({0.0, 0.0, 0.0, 0.0}, p);
    EXPECT_TRUE(low.saturated);
    for (double w : low.speeds.omega) EXPECT_EQ(w, p.rotor_speed_min);

    MixResult high = mix_inverse({100.0, 0.0, 0.0, 0.0}, p);
    EXPECT_TRUE(high.saturated);
    for (double w : high.speeds.omega) EXPECT_EQ(w, p.rotor_speed_max);

    MixResult nan = mix_inverse({std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0, 0.0}, p);
    EXPECT_TRUE(nan.saturated);
    for (double w : nan.speeds.omega) EXPECT_TRUE(std::isfinite(w));
}

TEST(Dynamics, FreeFallFollowsSemiImplicitRecurrence) {
    PhysicalParams p;
    p.rotor_speed_min = 0.0;
    RigidState s;
    s.position = {0.0, 0.0, 100.0};
    const RotorSpeeds off{};
    RotorSpeeds actual{};
    const int n = 120;
    for (int i = 0; i < n; ++i) {
        const StepResult r = step(s, off, actual, {}, p, kDt);
        s = r.state;
        actual = r.rotors;
    }
    // v_n = -g n dt, z_n = z0 - g dt^2 n (n + 1) / 2
    EXPECT_NEAR(s.velocity.z, -p.gravity * n * kDt, 1e-9);
    EXPECT_NEAR(s.position.z, 100.0 - p.gravity * kDt * kDt * n * (n + 1) / 2.0, 1e-9);
    EXPECT_EQ(s.position.x, 0.0);
}

TEST(Dynamics, HoverSpeedsHoldPosition) {
    const PhysicalParams p;
    RigidState s;
    s.position = {1.0, 2.0, 10.0};
    const RotorSpeeds hover = RotorSpeeds::uniform(p.hover_speed());
    RotorSpeeds actual = hover;
    for (int i = 0; i < 600; ++i) {
        const StepResult r = step(s, hover, actual, {}, p, kDt);
        s = r.state;
        actual = r.rotors;
    }
    EXPECT_LT((s.position - Vec3{1.0, 2.0, 10.0}).norm(), 1e-9);
}

TEST(Dynamics, MotorLagIsFirstOrder) {
    const PhysicalParams p;
    RigidState s;
    s.position.z = 10.0;
    const RotorSpeeds from = RotorSpeeds::uniform(4000.0);
    const RotorSpeeds to = RotorSpeeds::uniform(5000.0);
    const StepResult r = step(s, to, from, {}, p, kDt);
    EXPECT_NEAR(r.rotors.omega[0], 4000.0 + p.motor_lag * kDt * 1000.0, 1e-9);
}

TEST(Dynamics, MomentSigns) {
    const PhysicalParams p;
    RigidState s;
    s.position.z = 10.0;
    const double h = p.hover_speed();
    auto rates_after = [&](RotorSpeeds w) { return step(s, w, w, {}, p, kDt).state.body_rates; };

    EXPECT_GT(rates_after({{h, h + 100, h, h - 100}}).x, 0.0);  // rotor 2 faster: +roll
    EXPECT_GT(rates_after({{h - 100, h, h + 100, h}}).y, 0.0);  // rotor 3 faster: +pitch
    EXPECT_GT(rates_after({{h + 50, h - 50, h + 50, h - 50}}).z, 0.0);  // 1/3 pair faster: +yaw
}

TEST(Dynamics, GyroscopicCoupling) {
    PhysicalParams p;
    RigidState s;
    s.position.z = 10.0;
    s.body_rates = {1.0, 0.0, 2.0};
    const RotorSpeeds h = RotorSpeeds::uniform(p.hover_speed());
    const Vec3 w = step(s, h, h, {}, p, kDt).state.body_rates;
    // q_dot = (Iz - Ix) r p / Iy
    const double qdot = (p.inertia.z - p.inertia.x) * 2.0 * 1.0 / p.inertia.y;
    EXPECT_NEAR(w.y, qdot * kDt, 1e-12);
}

TEST(Dynamics, DisturbanceAcceleratesByForceOverMass) {
    const PhysicalParams p;
    RigidState s;
    s.position.z = 10.0;
    const RotorSpeeds h = RotorSpeeds::uniform(p.hover_speed());
    const StepResult r = step(s, h, h, Disturbance{{0.1, -0.2, 0.0}}, p, kDt);
    EXPECT_NEAR(r.state.velocity.x, 0.1 / p.mass * kDt, 1e-15);
    EXPECT_NEAR(r.state.velocity.y, -0.2 / p.mass * kDt, 1e-15);
}

TEST(Dynamics, YawStaysWrapped) {
    const PhysicalParams p;
    RigidState s;
    s.position.z = 10.0;
    s.attitude.z = kPi - 1e-4;
    s.body_rates.z = 1.0;
    const RotorSpeeds h = RotorSpeeds::uniform(p.hover_speed());
    const RigidState n = step(s, h, h, {}, p, kDt).state;
    EXPECT_LE(n.attitude.z, kPi);
    EXPECT_GT(n.attitude.z, -kPi);
    EXPECT_LT(n.attitude.z, 0.0);
}

TEST(Dynamics, NonFiniteInputFaults) {
    const PhysicalParams p;
    RigidState s;
    s.position.z = 10.0;
    RotorSpeeds bad = RotorSpeeds::uniform(std::numeric_limits<double>::quiet_NaN());
    EXPECT_TRUE(step(s, bad, bad, {}, p, kDt).fault);
}
