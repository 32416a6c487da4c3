#pragma once

// Values that leave the engine: per-tick world snapshots, log events and
// operator command requests. All are plain data, safe to share once built.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rescue/controller.hpp"
#include "rescue/dynamics.hpp"
#include "rescue/navigator.hpp"
#include "rescue/scene.hpp"
#include "rescue/telemetry.hpp"

namespace rescue {

struct UavSnapshot {
    std::uint32_t id = 0;
    UavColor color = UavColor::red;
    RigidState state;
    RotorSpeeds rotors;
    double battery = 0.0;
    AutonomyLevel level = AutonomyLevel::waypoint_sequence;
    FlightStatus status = FlightStatus::grounded;
    NavMode mode = NavMode::hover;
    std::vector<Waypoint> queue;
    std::uint64_t plan_id = 0;
    bool saturated = false;
    Reference reference;
    double speed_scale = 1.0;

    bool operator==(const UavSnapshot&) const = default;
};

struct DeviationSummary {
    std::uint32_t uav = 0;
    std::uint64_t samples = 0;
    double error = 0.0;  // m, latest |actual - planned|
    std::optional<ErrorEllipse> ellipse;
    std::optional<Vec3> wind;  // N, only from a steady window

    bool operator==(const DeviationSummary&) const = default;
};

struct WorldSnapshot {
    std::uint64_t tick = 0;
    double time = 0.0;
    std::vector<UavSnapshot> uavs;
    std::vector<Entity> entities;
    ScoreBoard score;
    SwarmHealth health;
    std::vector<DeviationSummary> deviation;

    bool operator==(const WorldSnapshot&) const = default;
};

enum class EventSource { uav, operator_input, system };

std::string_view event_source_name(EventSource s);
std::optional<EventSource> event_source_from_name(std::string_view s);

struct EventRecord {
    std::uint64_t tick = 0;
    double time = 0.0;
    EventSource source = EventSource::system;
    std::string kind;  // command, reject, waypoint-reached, tag, identify, battery-low, battery-depleted, crash, landed
    nlohmann::json payload = nlohmann::json::object();

    bool operator==(const EventRecord&) const = default;
};

/// An operator command addressed to one or more UAVs.
struct CommandRequest {
    std::vector<std::uint32_t> uav_ids;
    OperatorCommand command;

    bool operator==(const CommandRequest&) const = default;
};

struct StampedCommand {
    std::uint64_t tick = 0;  // tick at which the engine applies it
    CommandRequest request;
};

}  // namespace rescue
