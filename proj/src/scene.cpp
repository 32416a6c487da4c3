#include "rescue/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "rescue/kernels.hpp"

namespace rescue {

namespace {

void pick_target(Entity& e, Rng& rng, const WorldBounds& bounds) {
    e.target_x = rng.uniform(0.0, bounds.width);
    e.target_y = rng.uniform(0.0, bounds.height);
}

void face_target(Entity& e) {
    const double dx = e.target_x - e.x;
    const double dy = e.target_y - e.y;
    if (dx != 0.0 || dy != 0.0) e.heading = std::atan2(dy, dx);
}

}  // namespace

std::string_view entity_kind_name(EntityKind k) {
    switch (k) {
        case EntityKind::person: return "person";
        case EntityKind::car: return "car";
        case EntityKind::helicopter: return "helicopter";
        case EntityKind::fire: return "fire";
    }
    return "person";
}

std::optional<EntityKind> entity_kind_from_name(std::string_view s) {
    for (EntityKind k : {EntityKind::person, EntityKind::car, EntityKind::helicopter, EntityKind::fire})
        if (entity_kind_name(k) == s) return k;
    return std::nullopt;
}

double EntityWalkParams::speed_of(EntityKind k) const {
    switch (k) {
        case EntityKind::person: return person_speed;
        case EntityKind::car: return car_speed;
        case EntityKind::helicopter: return helicopter_speed;
        case EntityKind::fire: return 0.0;
    }
    return 0.0;
}

std::vector<Entity> spawn_entities(const EntityCounts& counts, std::span<const EntitySpawn> layout,
                                   const WorldBounds& bounds, const EntityWalkParams& walk, Rng& rng) {
    std::vector<Entity> out;
    auto add = [&](EntityKind kind, double x, double y) {
        Entity e;
        e.id = static_cast<std::uint32_t>(out.size() + 1);
        e.kind = kind;
        e.x = x;
        e.y = y;
        e.speed = walk.speed_of(kind);
        if (kind == EntityKind::fire) {
            e.target_x = x;
            e.target_y = y;
        } else {
            pick_target(e, rng, bounds);
            face_target(e);
        }
        out.push_back(e);
    };

    if (!layout.empty()) {
        for (const EntitySpawn& s : layout) add(s.kind, s.x, s.y);
        return out;
    }
    const std::array<std::pair<EntityKind, int>, 4> groups{{{EntityKind::person, counts.persons},
                                                            {EntityKind::car, counts.cars},
                                                            {EntityKind::helicopter, counts.helicopters},
                                                            {EntityKind::fire, counts.fires}}};
    for (const auto& [kind, n] : groups) {
        for (int i = 0; i < n; ++i) {
            const double x = rng.uniform(0.0, bounds.width);
            const double y = rng.uniform(0.0, bounds.height);
            add(kind, x, y);
        }
    }
    return out;
}

void step_entities(std::span<Entity> entities, Rng& rng, const WorldBounds& bounds, const EntityWalkParams& walk,
                   double dt) {
    for (Entity& e : entities) {
        if (e.kind == EntityKind::fire) continue;

        if (rng.uniform() < walk.repick_probability) {
            pick_target(e, rng, bounds);
            face_target(e);
        }

        const double dx = e.target_x - e.x;
        const double dy = e.target_y - e.y;
        const double dist = std::hypot(dx, dy);
        const double reach = e.speed * dt;
        if (dist <= reach) {
            e.x = e.target_x;
            e.y = e.target_y;
            pick_target(e, rng, bounds);
            face_target(e);
        } else {
            e.x += dx / dist * reach;
            e.y += dy / dist * reach;
            e.heading = std::atan2(dy, dx);
        }
    }
}

std::string_view color_name(UavColor c) {
    switch (c) {
        case UavColor::red: return "red";
        case UavColor::yellow: return "yellow";
        case UavColor::green: return "green";
        case UavColor::blue: return "blue";
    }
    return "red";
}

std::optional<UavColor> color_from_name(std::string_view s) {
    for (UavColor c : {UavColor::red, UavColor::yellow, UavColor::green, UavColor::blue})
        if (color_name(c) == s) return c;
    return std::nullopt;
}

std::string_view flight_status_name(FlightStatus s) {
    switch (s) {
        case FlightStatus::grounded: return "grounded";
        case FlightStatus::flying: return "flying";
        case FlightStatus::crashed: return "crashed";
    }
    return "grounded";
}

bool HomeBase::contains(double px, double py) const { return std::hypot(px - x, py - y) <= radius; }

double battery_step(const UavUnit& uav, const HomeBase& base, const BatteryParams& params, double dt) {
    double level = uav.battery;
    if (uav.status == FlightStatus::flying) {
        level -= (params.time_drain + params.move_drain * uav.state.velocity.norm()) * dt;
    } else if (uav.status == FlightStatus::grounded && base.contains(uav.state.position.x, uav.state.position.y)) {
        level += params.charge_rate * dt;
    }
    return std::clamp(level, 0.0, 100.0);
}

CameraFootprint camera_footprint(const UavUnit& uav, double fov) {
    const double altitude = std::max(0.0, uav.state.position.z);
    return {uav.state.position.x, uav.state.position.y, altitude * std::tan(fov / 2.0)};
}

std::vector<std::uint32_t> visible_entities(const UavUnit& uav, std::span<const Entity> entities, double fov) {
    std::vector<std::uint32_t> out;
    if (uav.status != FlightStatus::flying || entities.empty()) return out;
    const CameraFootprint fp = camera_footprint(uav, fov);
    if (!(fp.half_side > 0.0)) return out;

    std::vector<double> xs(entities.size()), ys(entities.size());
    for (std::size_t i = 0; i < entities.size(); ++i) {
        xs[i] = entities[i].x;
        ys[i] = entities[i].y;
    }
    std::vector<std::uint8_t> mask(entities.size());
    kernels::window_mask(xs, ys, {fp.cx, fp.cy, fp.half_side}, mask);

    for (std::size_t i = 0; i < entities.size(); ++i)
        if (mask[i]) out.push_back(entities[i].id);
    std::sort(out.begin(), out.end());
    return out;
}

void ScoreBoard::note_identified(Entity& e) {
    if (e.identified) return;
    e.identified = true;
    if (e.kind == EntityKind::person) ++persons_identified;
    if (e.kind == EntityKind::car) ++cars_identified;
}

Result<TagOutcome, RejectReason> tag_entity(const UavUnit& uav, std::uint32_t entity_id, std::span<Entity> entities,
                                            ScoreBoard& score, double fov) {
    auto it = std::find_if(entities.begin(), entities.end(), [&](const Entity& e) { return e.id == entity_id; });
    if (it == entities.end()) return RejectReason::unknown_id;
    if (it->status == TagStatus::tagged) return RejectReason::already_tagged;

    const std::vector<std::uint32_t> seen = visible_entities(uav, std::span<const Entity>(entities), fov);
    if (!std::binary_search(seen.begin(), seen.end(), entity_id)) return RejectReason::not_visible;

    score.note_identified(*it);
    it->status = TagStatus::tagged;
    if (it->kind == EntityKind::person) ++score.persons_tagged;
    if (it->kind == EntityKind::car) ++score.cars_tagged;
    return TagOutcome{it->id, it->kind};
}

SwarmHealth swarm_health(std::span<const UavUnit> uavs) {
    SwarmHealth h;
    if (uavs.empty()) return h;
    double sum = 0.0;
    h.min_battery = std::numeric_limits<double>::infinity();
    for (const UavUnit& u : uavs) {
        sum += u.battery;
        h.min_battery = std::min(h.min_battery, u.battery);
        switch (u.status) {
            case FlightStatus::flying: ++h.flying; break;
            case FlightStatus::grounded: ++h.grounded; break;
            case FlightStatus::crashed: ++h.crashed; break;
        }
    }
    h.mean_battery = sum / static_cast<double>(uavs.size());
    return h;
}

}  // namespace rescue
