#pragma once

// Run artifacts written by the command-line tool: the summary document and
// per-snapshot trajectory/deviation CSV rows.

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rescue/engine.hpp"

namespace rescue {

struct TrackingSummary {
    double mean = 0.0;  // m
    double max = 0.0;   // m
    std::uint64_t samples = 0;
};

struct UavSummary {
    std::uint32_t id = 0;
    UavColor color = UavColor::red;
    FlightStatus status = FlightStatus::grounded;
    double distance_flown = 0.0;  // m
    double final_battery = 0.0;   // %
    std::uint64_t waypoints_reached = 0;
    std::optional<TrackingSummary> tracking;  // only if the UAV flew a waypoint plan
};

struct RunSummary {
    std::uint64_t seed = 0;
    std::uint64_t ticks = 0;
    double duration = 0.0;  // s
    std::uint64_t scenario_hash = 0;
    std::uint64_t final_hash = 0;
    std::vector<UavSummary> uavs;
    ScoreBoard score;
    SwarmHealth health;
    std::uint64_t commands = 0;
    std::uint64_t rejections = 0;
    std::optional<double> apm;  // only when commands were issued
};

RunSummary summarize(const Engine& engine, std::span<const EventRecord> events);
nlohmann::json to_json(const RunSummary& s);

/// Header t,uav,x,y,z,xt,yt,zt; one row per UAV per snapshot.
void write_trajectory_header(std::ostream& out);
void write_trajectory_rows(std::ostream& out, const WorldSnapshot& s);

/// Rows for write_deviation_csv.
void append_deviation_rows(std::vector<DeviationRow>& rows, const WorldSnapshot& s);

}  // namespace rescue
