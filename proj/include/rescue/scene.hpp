#pragma once

// The disaster scene: roaming entities, home base, UAV battery, downward
// camera footprints, detection/tagging and the scoreboard.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rescue/dynamics.hpp"
#include "rescue/navigator.hpp"
#include "rescue/result.hpp"
#include "rescue/rng.hpp"

namespace rescue {

struct WorldBounds {
    double width = 1000.0;   // m, x in [0, width]
    double height = 1000.0;  // m, y in [0, height]

    [[nodiscard]] bool contains(double x, double y) const {
        return x >= 0.0 && x <= width && y >= 0.0 && y <= height;
    }
    bool operator==(const WorldBounds&) const = default;
};

enum class EntityKind { person, car, helicopter, fire };
enum class TagStatus { untagged, tagged };

std::string_view entity_kind_name(EntityKind k);
std::optional<EntityKind> entity_kind_from_name(std::string_view s);

struct Entity {
    std::uint32_t id = 0;
    EntityKind kind = EntityKind::person;
    double x = 0.0;  // m, ground position
    double y = 0.0;
    double heading = 0.0;  // rad
    double speed = 0.0;    // m/s
    TagStatus status = TagStatus::untagged;  // tagged is absorbing
    bool identified = false;                 // seen by any camera at least once
    double target_x = 0.0;  // current random-walk destination
    double target_y = 0.0;

    bool operator==(const Entity&) const = default;
};

struct EntityCounts {
    int persons = 20;
    int cars = 10;
    int helicopters = 2;
    int fires = 5;
    bool operator==(const EntityCounts&) const = default;
};

struct EntityWalkParams {
    double person_speed = 1.2;       // m/s
    double car_speed = 8.0;          // m/s
    double helicopter_speed = 15.0;  // m/s
    double repick_probability = 0.002;  // per step

    [[nodiscard]] double speed_of(EntityKind k) const;
    bool operator==(const EntityWalkParams&) const = default;
};

struct EntitySpawn {
    EntityKind kind = EntityKind::person;
    double x = 0.0;
    double y = 0.0;
    bool operator==(const EntitySpawn&) const = default;
};

/// Initial entity set. Explicit layout wins over counts when non-empty.
std::vector<Entity> spawn_entities(const EntityCounts& counts, std::span<const EntitySpawn> layout,
                                   const WorldBounds& bounds, const EntityWalkParams& walk, Rng& rng);

/// Random-waypoint walk for mobile entities; fires never move. Entities are
/// visited in id order and consume the stream in that order, so tracks depend
/// only on the seed.
void step_entities(std::span<Entity> entities, Rng& rng, const WorldBounds& bounds, const EntityWalkParams& walk,
                   double dt);

enum class UavColor { red, yellow, green, blue };
enum class FlightStatus { grounded, flying, crashed };

std::string_view color_name(UavColor c);
std::optional<UavColor> color_from_name(std::string_view s);
std::string_view flight_status_name(FlightStatus s);

struct UavUnit {
    std::uint32_t id = 0;
    UavColor color = UavColor::red;
    RigidState state;
    double battery = 100.0;  // percent
    AutonomyLevel level = AutonomyLevel::waypoint_sequence;
    FlightStatus status = FlightStatus::grounded;
};

struct HomeBase {
    double x = 500.0;
    double y = 500.0;
    double radius = 15.0;  // m

    [[nodiscard]] bool contains(double px, double py) const;
    bool operator==(const HomeBase&) const = default;
};

struct BatteryParams {
    double time_drain = 100.0 / 1200.0;  // %/s airborne (20 min endurance)
    double move_drain = 0.01;            // %/m flown
    double charge_rate = 1.0;            // %/s grounded at base
    double low_threshold = 20.0;         // % for the battery-low event

    bool operator==(const BatteryParams&) const = default;
};

/// Battery level after dt. Flying drains by time and speed; grounded inside
/// the base radius charges; otherwise unchanged. Clamped to [0, 100].
double battery_step(const UavUnit& uav, const HomeBase& base, const BatteryParams& params, double dt);

struct CameraFootprint {
    double cx = 0.0;
    double cy = 0.0;
    double half_side = 0.0;  // m
};

inline constexpr double kDefaultCameraFov = 60.0 * kPi / 180.0;

/// Square ground footprint of the downward camera: half_side = altitude * tan(fov / 2).
CameraFootprint camera_footprint(const UavUnit& uav, double fov = kDefaultCameraFov);

/// Ids of entities inside the closed footprint, ascending. Empty unless flying.
std::vector<std::uint32_t> visible_entities(const UavUnit& uav, std::span<const Entity> entities,
                                            double fov = kDefaultCameraFov);

struct ScoreBoard {
    int persons_identified = 0;
    int persons_tagged = 0;
    int cars_identified = 0;
    int cars_tagged = 0;

    /// First sighting bookkeeping; no-op if already identified.
    void note_identified(Entity& e);
    bool operator==(const ScoreBoard&) const = default;
};

struct TagOutcome {
    std::uint32_t entity_id = 0;
    EntityKind kind = EntityKind::person;
};

Result<TagOutcome, RejectReason> tag_entity(const UavUnit& uav, std::uint32_t entity_id, std::span<Entity> entities,
                                            ScoreBoard& score, double fov = kDefaultCameraFov);

struct SwarmHealth {
    double mean_battery = 0.0;
    double min_battery = 0.0;
    int flying = 0;
    int grounded = 0;
    int crashed = 0;
    bool operator==(const SwarmHealth&) const = default;
};

SwarmHealth swarm_health(std::span<const UavUnit> uavs);

}  // namespace rescue
