#include <gtest/gtest.h>

#include <cmath>

#include "rescue/navigator.hpp"

using namespace rescue;

namespace {

// Closed-form distance along a trapezoid, computed from the boundary
// conditions rather than the planner's stored phase times.
double oracle_distance(double d, double vmax, double amax, double tau) {
    double vp = std::min(vmax, std::sqrt(d * amax));
    double ta = vp / amax;
    double tc = (d - vp * ta) / vp;
    double T = 2 * ta + tc;
    if (tau <= 0) return 0;
    if (tau >= T) return d;
    if (tau < ta) return 0.5 * amax * tau * tau;
    if (tau < ta + tc) return 0.5 * vp * ta + vp * (tau - ta);
    double r = T - tau;
    return d - 0.5 * amax * r * r;
}

RigidState still(const Vec3& p) {
    RigidState s;
    s.position = p;
    return s;
}

}  // namespace

TEST(Navigator, TrapezoidLongSegment) {
    const TrajectoryPlan plan = plan_segment({0, 0, 10}, {{100, 0, 10}, 1}, 5.0, 2.0, 0.0);
    EXPECT_DOUBLE_EQ(plan.profile.v_peak, 5.0);
    EXPECT_DOUBLE_EQ(plan.profile.t_accel, 2.5);
    EXPECT_DOUBLE_EQ(plan.profile.t_cruise, (100.0 - 12.5) / 5.0);
    EXPECT_NEAR(plan.end_time(), 100.0 / 5.0 + 5.0 / 2.0, 1e-12);
}

TEST(Navigator, TriangularShortSegment) {
    const TrajectoryPlan plan = plan_segment({0, 0, 10}, {{10, 0, 10}, 1}, 5.0, 2.0, 0.0);
    EXPECT_EQ(plan.profile.t_cruise, 0.0);
    EXPECT_NEAR(plan.profile.v_peak, std::sqrt(20.0), 1e-12);
    EXPECT_NEAR(plan.end_time(), 2.0 * std::sqrt(10.0 / 2.0), 1e-12);
}

TEST(Navigator, SampleMatchesOracle) {
    for (double d : {0.3, 4.0, 12.5, 37.0}) {
        const Vec3 from{1, 2, 5};
        const Vec3 dir = Vec3{3, -4, 0} / 5.0;
        const TrajectoryPlan plan = plan_segment(from, {from + dir * d, 1}, 5.0, 2.0, 3.0);
        for (double t = 2.0; t < plan.end_time() + 2.0; t += 0.05) {
            const Reference r = sample(plan, t);
            const double s = oracle_distance(d, 5.0, 2.0, t - 3.0);
            EXPECT_NEAR((r.position - from).norm(), s, 1e-9) << "d=" << d << " t=" << t;
            EXPECT_LE(r.velocity.norm(), 5.0 + 1e-12);
            EXPECT_LE(r.acceleration.norm(), 2.0 + 1e-12);
        }
        const Reference end = sample(plan, plan.end_time() + 1.0);
        EXPECT_EQ(end.position, plan.goal);
        EXPECT_EQ(end.velocity, Vec3{});
    }
}

TEST(Navigator, VelocityIsDerivativeOfPosition) {
    const TrajectoryPlan plan = plan_segment({0, 0, 10}, {{30, 0, 10}, 1}, 5.0, 2.0, 0.0);
    const double h = 1e-5;
    for (double t = 0.1; t < plan.end_time() - 0.1; t += 0.37) {
        const double fd = (sample(plan, t + h).position.x - sample(plan, t - h).position.x) / (2 * h);
        EXPECT_NEAR(sample(plan, t).velocity.x, fd, 1e-6);
    }
}

TEST(Navigator, ZeroLengthPlanIsEmpty) {
    const TrajectoryPlan plan = plan_segment({1, 1, 1}, {{1, 1, 1}, 1}, 5.0, 2.0, 0.0);
    EXPECT_TRUE(plan.empty());
    EXPECT_EQ(sample(plan, 10.0).position, (Vec3{1, 1, 1}));
}

TEST(Navigator, DirectReferenceIntegratesInHeadingFrame) {
    Reference prev;
    prev.position = {0, 0, 10};
    prev.yaw = kPi / 2;
    const Reference r = direct_reference({0, 1, 0, 0}, prev, 2.0, 0.5, 0.1);
    EXPECT_NEAR(r.velocity.x, 0.0, 1e-12);
    EXPECT_NEAR(r.velocity.y, 2.0, 1e-12);
    EXPECT_NEAR(r.position.y, 0.2, 1e-12);

    const Reference turn = direct_reference({0, 0, 1, 0}, prev, 2.0, 0.5, 0.1);
    EXPECT_NEAR(turn.yaw, kPi / 2 + 0.05, 1e-12);
    EXPECT_EQ(turn.velocity, Vec3{});

    const Reference left = direct_reference({0, 0, 0, 1}, Reference{}, 2.0, 0.5, 0.1);
    EXPECT_NEAR(left.velocity.y, 2.0, 1e-12);
}

TEST(Navigator, DirectInputValidity) {
    EXPECT_TRUE((DirectControlInput{1, -1, 0, 1}).valid());
    EXPECT_FALSE((DirectControlInput{2, 0, 0, 0}).valid());
    EXPECT_TRUE(DirectControlInput{}.idle());
}

TEST(Navigator, SpeedScales) {
    EXPECT_TRUE(valid_speed_scale(0.5));
    EXPECT_TRUE(valid_speed_scale(1.5));
    EXPECT_FALSE(valid_speed_scale(2.0));
}

TEST(Navigator, AutonomyLevels) {
    const WaypointQueue empty;
    const SetWaypoint set{{1, 2, 3}};
    const AppendWaypoint app{{4, 5, 6}};

    EXPECT_FALSE(apply_autonomy(AutonomyLevel::direct, set, empty).accepted);
    EXPECT_EQ(apply_autonomy(AutonomyLevel::direct, set, empty).reason, RejectReason::level_forbidden);
    EXPECT_TRUE(apply_autonomy(AutonomyLevel::direct, DirectControl{}, empty).accepted);
    EXPECT_EQ(apply_autonomy(AutonomyLevel::direct, DirectControl{}, empty, 2).reason, RejectReason::single_uav_only);

    EXPECT_FALSE(apply_autonomy(AutonomyLevel::single_waypoint, app, empty).accepted);
    AutonomyDecision d = apply_autonomy(AutonomyLevel::waypoint_sequence, app, empty);
    ASSERT_TRUE(d.accepted);
    d = apply_autonomy(AutonomyLevel::waypoint_sequence, app, d.queue);
    EXPECT_EQ(d.queue.items.size(), 2u);
    EXPECT_EQ(d.queue.items[0].id, 1u);
    EXPECT_EQ(d.queue.items[1].id, 2u);

    const AutonomyDecision replaced = apply_autonomy(AutonomyLevel::waypoint_sequence, set, d.queue);
    ASSERT_EQ(replaced.queue.items.size(), 1u);
    EXPECT_EQ(replaced.queue.items[0].position, set.position);
    EXPECT_EQ(replaced.queue.items[0].id, 3u);

    EXPECT_TRUE(apply_autonomy(AutonomyLevel::waypoint_sequence, DirectControl{}, d.queue).queue.items.empty());
    EXPECT_EQ(apply_autonomy(AutonomyLevel::waypoint_sequence, Pause{}, d.queue).queue, d.queue);
}

TEST(Navigator, ReachesAndPopsQueue) {
    Navigator nav({}, {0, 0, 10});
    WaypointQueue q;
    q.items = {{{10, 0, 10}, 1}, {{10, 10, 10}, 2}};
    q.next_id = 3;
    nav.set_queue(q, 0.0);
    EXPECT_EQ(nav.mode(), NavMode::waypoint);
    const double t1 = nav.plan()->end_time();

    EXPECT_TRUE(nav.advance(still({10, 0, 10}), t1 - 0.01).empty());  // not yet due
    EXPECT_TRUE(nav.advance(still({9, 0, 10}), t1).empty());           // outside radius
    RigidState moving = still({10, 0, 10});
    moving.velocity = {0.3, 0, 0};
    EXPECT_TRUE(nav.advance(moving, t1).empty());  // too fast

    auto reached = nav.advance(still({10, 0, 10}), t1);
    ASSERT_EQ(reached.size(), 1u);
    EXPECT_EQ(reached[0].waypoint.id, 1u);
    EXPECT_FALSE(reached[0].queue_empty);
    EXPECT_EQ(nav.plan()->start, (Vec3{10, 0, 10}));

    const double t2 = nav.plan()->end_time();
    reached = nav.advance(still({10, 10, 10}), t2);
    ASSERT_EQ(reached.size(), 1u);
    EXPECT_TRUE(reached[0].queue_empty);
    EXPECT_EQ(nav.mode(), NavMode::hover);
    EXPECT_EQ(nav.reference(t2 + 5, 1.0 / 60).position, (Vec3{10, 10, 10}));
}

TEST(Navigator, PauseHoldsAndResumeReplans) {
    Navigator nav({}, {0, 0, 10});
    WaypointQueue q;
    q.items = {{{20, 0, 10}, 1}};
    nav.set_queue(q, 0.0);
    const Vec3 mid = nav.reference(2.0, 1.0 / 60).position;
    nav.pause();
    EXPECT_EQ(nav.mode(), NavMode::paused);
    EXPECT_EQ(nav.reference(5.0, 1.0 / 60).position, mid);
    EXPECT_EQ(nav.reference(5.0, 1.0 / 60).velocity, Vec3{});
    const auto id = nav.plan_id();
    nav.resume(5.0);
    EXPECT_EQ(nav.mode(), NavMode::waypoint);
    EXPECT_EQ(nav.plan_id(), id + 1);
    EXPECT_EQ(nav.plan()->start, mid);
    EXPECT_EQ(nav.plan()->start_time, 5.0);
}

TEST(Navigator, DirectClearsQueue) {
    Navigator nav({}, {0, 0, 10});
    WaypointQueue q;
    q.items = {{{20, 0, 10}, 1}};
    nav.set_queue(q, 0.0);
    nav.set_direct({1, 0, 0, 0});
    EXPECT_EQ(nav.mode(), NavMode::direct);
    EXPECT_TRUE(nav.queue().items.empty());
    const Reference r = nav.reference(0.0, 0.5);
    EXPECT_NEAR(r.position.z, 10.0 + nav.limits().v_max * 0.5, 1e-12);
}

TEST(Navigator, SpeedScaleAffectsNextPlan) {
    Navigator nav({}, {0, 0, 10});
    nav.set_speed_scale(0.5);
    WaypointQueue q;
    q.items = {{{100, 0, 10}, 1}};
    nav.set_queue(q, 0.0);
    EXPECT_DOUBLE_EQ(nav.plan()->profile.v_peak, 2.5);
}

TEST(Navigator, LandingDescendsAtLandSpeed) {
    Navigator nav({}, {0, 0, 10});
    nav.land(1.0);
    const Reference r = nav.reference(3.0, 1.0 / 60);
    EXPECT_NEAR(r.position.z, 10.0 - 2.0 * nav.limits().land_speed, 1e-12);
    EXPECT_NEAR(r.velocity.z, -nav.limits().land_speed, 1e-12);
}
