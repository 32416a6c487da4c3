#pragma once

// Fixed-step simulation engine. One call to tick() advances the world by one
// timestep through a fixed pipeline:
//   1. operator commands (autonomy gate, tagging)
//   2. navigator advance and reference sampling
//   3. control
//   4. rigid-body dynamics, ground contact
//   5. battery
//   6. entity motion and camera identification
//   7. deviation telemetry
//   8. event emission, and a snapshot every snapshot_period() ticks

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "rescue/config.hpp"
#include "rescue/navigator.hpp"
#include "rescue/scene.hpp"
#include "rescue/snapshot.hpp"
#include "rescue/telemetry.hpp"

namespace rescue {

enum class TickStage { commands, navigation, control, dynamics, battery, entities, telemetry, events };

/// Vertical speed above which ground contact is a crash rather than a landing.
inline constexpr double kCrashSpeed = 2.0;  // m/s
/// Reference altitude above which a grounded UAV spins up and lifts off.
inline constexpr double kTakeoffAltitude = 0.1;  // m

struct TickOutput {
    std::vector<EventRecord> events;
    std::optional<WorldSnapshot> snapshot;
};

struct UavStats {
    double distance_flown = 0.0;  // m
    std::uint64_t waypoints_reached = 0;
    std::uint64_t tracking_samples = 0;  // ticks flown in waypoint mode
    double tracking_error_sum = 0.0;
    double tracking_error_max = 0.0;

    [[nodiscard]] double tracking_error_mean() const {
        return tracking_samples ? tracking_error_sum / static_cast<double>(tracking_samples) : 0.0;
    }
};

class Engine {
public:
    explicit Engine(SimConfig config);

    /// Queued for the next tick; applied in submission order.
    void submit(CommandRequest request);

    TickOutput tick();

    /// Snapshot of the current state, regardless of the snapshot schedule.
    [[nodiscard]] WorldSnapshot snapshot() const;

    [[nodiscard]] std::uint64_t tick_index() const { return tick_; }
    [[nodiscard]] double time() const { return static_cast<double>(tick_) * config_.timestep; }
    [[nodiscard]] const SimConfig& config() const { return config_; }
    [[nodiscard]] const std::vector<UavUnit>& uavs() const { return uavs_; }
    [[nodiscard]] const std::vector<Entity>& entities() const { return entities_; }
    [[nodiscard]] const ScoreBoard& score() const { return score_; }
    [[nodiscard]] const Navigator& navigator(std::size_t index) const { return slots_[index].nav; }
    [[nodiscard]] const UavStats& stats(std::size_t index) const { return slots_[index].stats; }
    [[nodiscard]] const DeviationBuffer& deviation(std::size_t index) const { return slots_[index].deviation; }
    [[nodiscard]] std::optional<std::size_t> index_of(std::uint32_t uav_id) const;

    /// Per-UAV external force, replacing the scenario-wide default.
    void set_disturbance(std::uint32_t uav_id, const Vec3& force);

    /// Called after each pipeline stage; used to observe ordering.
    void set_probe(std::function<void(TickStage, std::uint64_t tick)> probe) { probe_ = std::move(probe); }

private:
    struct Slot {
        Navigator nav;
        RotorSpeeds rotors;     // actual (lagged) speeds
        RotorSpeeds commanded;  // controller output this tick
        Reference reference;
        std::optional<DeviationSample> sample;  // pre-step reference vs position
        bool saturated = false;
        Disturbance disturbance;
        DeviationBuffer deviation;
        UavStats stats;
    };

    void apply_command(const CommandRequest& req, std::vector<EventRecord>& events);
    void apply_to_uav(std::size_t index, const CommandRequest& req, std::vector<EventRecord>& events);
    void ground(std::size_t index);
    void stage(TickStage s);
    EventRecord event(EventSource src, const char* kind, nlohmann::json payload, std::uint64_t tick) const;

    SimConfig config_;
    std::uint64_t tick_ = 0;
    std::uint64_t snapshot_period_ = 1;
    std::vector<UavUnit> uavs_;
    std::vector<Slot> slots_;
    std::vector<Entity> entities_;
    Rng entity_rng_;
    ScoreBoard score_;
    std::vector<CommandRequest> pending_;
    std::function<void(TickStage, std::uint64_t)> probe_;
};

}  // namespace rescue
