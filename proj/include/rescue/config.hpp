#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rescue/controller.hpp"
#include "rescue/dynamics.hpp"
#include "rescue/navigator.hpp"
#include "rescue/scene.hpp"

namespace rescue {

struct UavSpawn {
    UavColor color = UavColor::red;
    Vec3 position;  // z > 0 spawns hovering, z == 0 spawns grounded
    AutonomyLevel level = AutonomyLevel::waypoint_sequence;
    bool operator==(const UavSpawn&) const = default;
};

inline constexpr int kMaxUavs = 16;

struct SimConfig {
    std::uint64_t seed = 0;
    WorldBounds world;
    double timestep = 1.0 / 60.0;  // s
    double camera_fov = kDefaultCameraFov;  // rad
    PhysicalParams physics;
    Gains gains;
    NavigatorLimits navigator;
    BatteryParams battery;
    std::vector<UavSpawn> uavs;
    EntityCounts entity_counts;
    std::vector<EntitySpawn> entity_layout;
    EntityWalkParams walk;
    HomeBase base;
    Disturbance disturbance;  // applied to every UAV
    double snapshot_rate = 20.0;    // Hz
    double deviation_window = 5.0;  // s

    /// Throws ConfigError naming the offending element.
    void validate() const;

    /// Ticks between snapshots: ceil(1 / (snapshot_rate * timestep)).
    [[nodiscard]] std::uint64_t snapshot_period() const;
};

class ConfigError : public std::runtime_error {
public:
    enum class Kind { parse, validation };
    ConfigError(Kind kind, std::string path, const std::string& message)
        : std::runtime_error(path.empty() ? message : path + ": " + message), kind_(kind), path_(std::move(path)) {}

    [[nodiscard]] Kind kind() const { return kind_; }
    /// Element/attribute path, e.g. "scenario/world/@timestep".
    [[nodiscard]] const std::string& path() const { return path_; }

private:
    Kind kind_;
    std::string path_;
};

/// Four UAVs (red, yellow, green, blue) hovering at 10 m around the home base.
std::vector<UavSpawn> default_roster(const HomeBase& base, int count,
                                     AutonomyLevel level = AutonomyLevel::waypoint_sequence);

SimConfig default_config();

struct LoadedConfig {
    SimConfig config;
    std::vector<std::string> warnings;
};

/// Parses a <scenario> document, fills defaults and validates. Unknown
/// elements and attributes are errors.
LoadedConfig load_config(std::string_view xml);
LoadedConfig load_config_file(const std::string& path);

/// Stable fingerprint of every field; recorded in event logs.
std::uint64_t scenario_hash(const SimConfig& config);

}  // namespace rescue
