#include <gtest/gtest.h>

#include <cmath>

#include "rescue/scene.hpp"

using namespace rescue;

namespace {

UavUnit flying_at(const Vec3& p) {
    UavUnit u;
    u.id = 1;
    u.state.position = p;
    u.status = FlightStatus::flying;
    return u;
}

Entity entity(std::uint32_t id, EntityKind kind, double x, double y) {
    Entity e;
    e.id = id;
    e.kind = kind;
    e.x = x;
    e.y = y;
    return e;
}

}  // namespace

TEST(Scene, SpawnFromCounts) {
    const WorldBounds b;
    Rng rng(7, "entity-spawn");
    const auto es = spawn_entities(EntityCounts{}, {}, b, {}, rng);
    ASSERT_EQ(es.size(), 37u);
    int fires = 0;
    for (std::size_t i = 0; i < es.size(); ++i) {
        EXPECT_EQ(es[i].id, i + 1);
        EXPECT_TRUE(b.contains(es[i].x, es[i].y));
        EXPECT_TRUE(b.contains(es[i].target_x, es[i].target_y));
        EXPECT_EQ(es[i].status, TagStatus::untagged);
        if (es[i].kind == EntityKind::fire) ++fires;
    }
    EXPECT_EQ(fires, 5);
    EXPECT_EQ(es.front().kind, EntityKind::person);

    Rng again(7, "entity-spawn");
    EXPECT_EQ(spawn_entities(EntityCounts{}, {}, b, {}, again), es);
    Rng other(8, "entity-spawn");
    EXPECT_NE(spawn_entities(EntityCounts{}, {}, b, {}, other), es);
}

TEST(Scene, LayoutOverridesCounts) {
    Rng rng(1, "entity-spawn");
    const std::vector<EntitySpawn> layout{{EntityKind::car, 10, 20}, {EntityKind::fire, 30, 40}};
    const auto es = spawn_entities(EntityCounts{}, layout, {}, {}, rng);
    ASSERT_EQ(es.size(), 2u);
    EXPECT_EQ(es[0].kind, EntityKind::car);
    EXPECT_EQ(es[0].x, 10.0);
    EXPECT_EQ(es[0].speed, EntityWalkParams{}.car_speed);
    EXPECT_EQ(es[1].speed, 0.0);
}

TEST(Scene, WalkRespectsSpeedAndBounds) {
    const WorldBounds b{200.0, 100.0};
    const EntityWalkParams walk;
    Rng spawn(3, "entity-spawn");
    auto es = spawn_entities({5, 5, 2, 3}, {}, b, walk, spawn);
    Rng rng(3, "entity-walk");
    const double dt = 1.0 / 60.0;
    for (int t = 0; t < 3000; ++t) {
        const auto before = es;
        step_entities(es, rng, b, walk, dt);
        for (std::size_t i = 0; i < es.size(); ++i) {
            const double moved = std::hypot(es[i].x - before[i].x, es[i].y - before[i].y);
            EXPECT_LE(moved, walk.speed_of(es[i].kind) * dt + 1e-9);
            EXPECT_TRUE(b.contains(es[i].x, es[i].y));
            if (es[i].kind == EntityKind::fire) {
                EXPECT_EQ(moved, 0.0);
            }
        }
    }
}

TEST(Scene, BatteryDrainAndCharge) {
    const HomeBase base;
    const BatteryParams p;
    UavUnit u = flying_at({100, 100, 10});
    EXPECT_NEAR(battery_step(u, base, p, 1.0), 100.0 - 100.0 / 1200.0, 1e-12);
    u.state.velocity = {3, 4, 0};
    EXPECT_NEAR(battery_step(u, base, p, 1.0), 100.0 - 100.0 / 1200.0 - 0.05, 1e-12);

    u.status = FlightStatus::grounded;
    u.battery = 50.0;
    EXPECT_EQ(battery_step(u, base, p, 1.0), 50.0);  // away from base
    u.state.position = {base.x + 10, base.y, 0};
    EXPECT_EQ(battery_step(u, base, p, 1.0), 51.0);
    u.battery = 99.9;
    EXPECT_EQ(battery_step(u, base, p, 1.0), 100.0);

    u = flying_at({0, 0, 10});
    u.battery = 0.01;
    EXPECT_EQ(battery_step(u, base, p, 1.0), 0.0);
}

TEST(Scene, CameraFootprintIsClosedSquare) {
    // Centered on the origin so boundary coordinates are exact.
    const UavUnit u = flying_at({0, 0, 10});
    const double half = camera_footprint(u).half_side;
    EXPECT_NEAR(half, 10.0 * std::tan(kPi / 6.0), 1e-12);

    const std::vector<Entity> es{entity(1, EntityKind::person, half, 0),
                                 entity(2, EntityKind::person, std::nextafter(half, 1e9), 0),
                                 entity(3, EntityKind::car, -half, -half),
                                 entity(4, EntityKind::car, 0, std::nextafter(-half, -1e9)),
                                 entity(5, EntityKind::fire, 0.5 * half, -0.5 * half)};
    EXPECT_EQ(visible_entities(u, es), (std::vector<std::uint32_t>{1, 3, 5}));
}

TEST(Scene, GroundedSeesNothing) {
    UavUnit u = flying_at({50, 50, 10});
    u.status = FlightStatus::grounded;
    const std::vector<Entity> es{entity(1, EntityKind::person, 50, 50)};
    EXPECT_TRUE(visible_entities(u, es).empty());
}

TEST(Scene, TaggingRules) {
    const UavUnit u = flying_at({50, 50, 10});
    std::vector<Entity> es{entity(1, EntityKind::person, 50, 50), entity(2, EntityKind::car, 51, 50),
                           entity(3, EntityKind::person, 500, 500)};
    ScoreBoard score;

    auto r = tag_entity(u, 3, es, score);
    ASSERT_FALSE(r.ok());
    EXPECT_EQ(r.error(), RejectReason::not_visible);
    EXPECT_EQ(tag_entity(u, 99, es, score).error(), RejectReason::unknown_id);

    ASSERT_TRUE(tag_entity(u, 1, es, score).ok());
    EXPECT_EQ(es[0].status, TagStatus::tagged);
    EXPECT_TRUE(es[0].identified);
    EXPECT_EQ(score.persons_tagged, 1);
    EXPECT_EQ(score.persons_identified, 1);
    EXPECT_EQ(tag_entity(u, 1, es, score).error(), RejectReason::already_tagged);

    score.note_identified(es[1]);
    score.note_identified(es[1]);
    EXPECT_EQ(score.cars_identified, 1);
    ASSERT_TRUE(tag_entity(u, 2, es, score).ok());
    EXPECT_EQ(score.cars_identified, 1);
    EXPECT_EQ(score.cars_tagged, 1);
}

TEST(Scene, SwarmHealth) {
    std::vector<UavUnit> us(3);
    us[0].battery = 80;
    us[0].status = FlightStatus::flying;
    us[1].battery = 40;
    us[2].battery = 60;
    us[2].status = FlightStatus::crashed;
    const SwarmHealth h = swarm_health(us);
    EXPECT_DOUBLE_EQ(h.mean_battery, 60.0);
    EXPECT_EQ(h.min_battery, 40.0);
    EXPECT_EQ(h.flying, 1);
    EXPECT_EQ(h.grounded, 1);
    EXPECT_EQ(h.crashed, 1);
}

TEST(Scene, NameRoundTrips) {
    for (EntityKind k : {EntityKind::person, EntityKind::car, EntityKind::helicopter, EntityKind::fire})
        EXPECT_EQ(entity_kind_from_name(entity_kind_name(k)), k);
    for (UavColor c : {UavColor::red, UavColor::yellow, UavColor::green, UavColor::blue})
        EXPECT_EQ(color_from_name(color_name(c)), c);
    EXPECT_FALSE(color_from_name("cyan"));
}
