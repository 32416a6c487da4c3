#pragma once

// Waypoint navigation: trapezoidal straight-line segments between operator
// goals, the per-UAV waypoint queue, autonomy-level command semantics and
// direct (teleoperated) velocity references.

#include <cstdint>
#include <deque>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "rescue/controller.hpp"
#include "rescue/vec.hpp"

namespace rescue {

struct NavigatorLimits {
    double v_max = 5.0;           // m/s
    double a_max = 2.0;           // m/s^2
    double arrival_radius = 0.5;  // m
    double arrival_speed = 0.25;  // m/s
    double min_altitude = 1.0;    // m
    double yaw = 0.0;             // rad, mission heading
    double yaw_rate = 0.5;        // rad/s, direct-control turn rate
    double land_speed = 0.5;      // m/s

    void validate() const;
    bool operator==(const NavigatorLimits&) const = default;
};

struct Waypoint {
    Vec3 position;
    std::uint64_t id = 0;
    bool operator==(const Waypoint&) const = default;
};

/// Trapezoidal speed profile along a segment. Triangular when t_cruise == 0
/// and v_peak < v_max.
struct SpeedProfile {
    double t_accel = 0.0;
    double t_cruise = 0.0;
    double t_decel = 0.0;
    double v_peak = 0.0;
    double accel = 0.0;

    [[nodiscard]] double duration() const { return t_accel + t_cruise + t_decel; }
};

struct TrajectoryPlan {
    Vec3 start;
    Vec3 goal;
    Vec3 direction;  // unit, zero for an empty plan
    double distance = 0.0;
    SpeedProfile profile;
    double start_time = 0.0;
    double yaw = 0.0;
    std::uint64_t goal_id = 0;

    [[nodiscard]] double end_time() const { return start_time + profile.duration(); }
    [[nodiscard]] bool empty() const { return distance == 0.0; }
};

TrajectoryPlan plan_segment(const Vec3& from, const Waypoint& to, double v_max, double a_max, double t0,
                            double yaw = 0.0);

/// Times before start_time are treated as start_time; times after the plan
/// end hold the goal with zero velocity and acceleration.
Reference sample(const TrajectoryPlan& plan, double t);

enum class AutonomyLevel : int { direct = 1, single_waypoint = 2, waypoint_sequence = 3 };

std::optional<AutonomyLevel> autonomy_from_int(int level);

struct DirectControlInput {
    int throttle = 0;  // altitude, {-1, 0, +1}
    int surge = 0;     // forward/backward
    int yaw = 0;       // turn in place
    int slew = 0;      // +1 = left (body +y)

    [[nodiscard]] bool valid() const;
    [[nodiscard]] bool idle() const { return throttle == 0 && surge == 0 && yaw == 0 && slew == 0; }
    bool operator==(const DirectControlInput&) const = default;
};

/// Integrates a direct-control input one tick from the previous reference.
Reference direct_reference(const DirectControlInput& input, const Reference& previous, double speed,
                           double yaw_rate, double dt);

// Operator commands, addressed to one UAV after selection fan-out.
struct SetWaypoint { Vec3 position; bool operator==(const SetWaypoint&) const = default; };
struct AppendWaypoint { Vec3 position; bool operator==(const AppendWaypoint&) const = default; };
struct DirectControl { DirectControlInput input; bool operator==(const DirectControl&) const = default; };
struct SetSpeedScale { double scale = 1.0; bool operator==(const SetSpeedScale&) const = default; };
struct Pause { bool operator==(const Pause&) const = default; };
struct Resume { bool operator==(const Resume&) const = default; };
struct TagEntity { std::uint32_t entity_id = 0; bool operator==(const TagEntity&) const = default; };

using OperatorCommand =
    std::variant<SetWaypoint, AppendWaypoint, DirectControl, SetSpeedScale, Pause, Resume, TagEntity>;

std::string_view command_name(const OperatorCommand& cmd);

inline constexpr double kSpeedScales[] = {0.5, 1.0, 1.5};
bool valid_speed_scale(double scale);

struct WaypointQueue {
    std::deque<Waypoint> items;
    std::uint64_t next_id = 1;

    bool operator==(const WaypointQueue&) const = default;
};

enum class RejectReason {
    level_forbidden,
    single_uav_only,
    invalid_waypoint,
    battery_depleted,
    uav_crashed,
    not_visible,
    already_tagged,
    unknown_id,
    invalid_parameter,
};

std::string_view reject_reason_name(RejectReason r);

struct AutonomyDecision {
    bool accepted = false;
    RejectReason reason = RejectReason::level_forbidden;  // meaningful when !accepted
    WaypointQueue queue;
};

/// Pure autonomy gate. Level 1 takes direct control only (one UAV at a time),
/// level 2 adds SetWaypoint which replaces the queue with a single goal,
/// level 3 adds AppendWaypoint. Direct control clears any queued goals.
/// Speed scale, pause/resume and tagging are accepted at every level.
AutonomyDecision apply_autonomy(AutonomyLevel level, const OperatorCommand& cmd, const WaypointQueue& queue,
                                std::size_t selection_size = 1);

enum class NavMode { hover, waypoint, direct, paused, landing };

std::string_view nav_mode_name(NavMode m);

struct WaypointReached {
    Waypoint waypoint;
    double time = 0.0;
    bool queue_empty = false;
};

/// Per-UAV navigation state. Owned and sequenced by the engine tick.
class Navigator {
public:
    Navigator() = default;
    Navigator(const NavigatorLimits& limits, const Vec3& position);

    /// Installs the queue produced by apply_autonomy; replans when the front
    /// goal changed.
    void set_queue(WaypointQueue queue, double now);
    void set_direct(const DirectControlInput& input);
    void set_speed_scale(double scale) { speed_scale_ = scale; }
    void pause();
    void resume(double now);
    /// Descend in place until ground contact.
    void land(double now);
    /// Hover hold at a fixed point (used after touchdown and on spawn).
    void hold(const Vec3& point);

    /// Arrival detection; pops the queue and plans the next segment.
    std::vector<WaypointReached> advance(const RigidState& state, double now);

    /// Reference for the current tick. Direct mode integrates by dt.
    Reference reference(double now, double dt);

    [[nodiscard]] NavMode mode() const { return mode_; }
    [[nodiscard]] const WaypointQueue& queue() const { return queue_; }
    [[nodiscard]] const std::optional<TrajectoryPlan>& plan() const { return plan_; }
    [[nodiscard]] std::uint64_t plan_id() const { return plan_id_; }
    [[nodiscard]] double speed_scale() const { return speed_scale_; }
    [[nodiscard]] const Reference& last_reference() const { return last_ref_; }
    [[nodiscard]] const DirectControlInput& direct_input() const { return direct_; }
    [[nodiscard]] const NavigatorLimits& limits() const { return limits_; }

private:
    void replan(double now);

    NavigatorLimits limits_;
    NavMode mode_ = NavMode::hover;
    NavMode mode_before_pause_ = NavMode::hover;
    WaypointQueue queue_;
    std::optional<TrajectoryPlan> plan_;
    std::uint64_t plan_id_ = 0;  // increments on every new segment
    Reference last_ref_;
    DirectControlInput direct_;
    double speed_scale_ = 1.0;
    double landing_start_ = 0.0;
    Vec3 landing_from_;
};

}  // namespace rescue
