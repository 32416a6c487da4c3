#include "rescue/navigator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rescue/result.hpp"

namespace rescue {

namespace {

// Reference floor used while descending so that touchdown is an actual
// ground contact rather than an asymptotic approach to z = 0.
constexpr double kDescentFloor = -0.5;

}  // namespace

void NavigatorLimits::validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0; };
    if (!positive(v_max)) throw std::invalid_argument("navigator: invalid v-max");
    if (!positive(a_max)) throw std::invalid_argument("navigator: invalid a-max");
    if (!positive(arrival_radius)) throw std::invalid_argument("navigator: invalid arrival-radius");
    if (!positive(arrival_speed)) throw std::invalid_argument("navigator: invalid arrival-speed");
    if (!std::isfinite(min_altitude) || min_altitude < 0) throw std::invalid_argument("navigator: invalid min-altitude");
    if (!std::isfinite(yaw)) throw std::invalid_argument("navigator: invalid yaw");
    if (!positive(yaw_rate)) throw std::invalid_argument("navigator: invalid yaw-rate");
    if (!positive(land_speed)) throw std::invalid_argument("navigator: invalid land-speed");
}

TrajectoryPlan plan_segment(const Vec3& from, const Waypoint& to, double v_max, double a_max, double t0,
                            double yaw) {
    TrajectoryPlan plan;
    plan.start = from;
    plan.goal = to.position;
    plan.start_time = t0;
    plan.yaw = yaw;
    plan.goal_id = to.id;

    const Vec3 delta = to.position - from;
    const double d = delta.norm();
    if (!(d > 0.0)) return plan;

    plan.distance = d;
    plan.direction = delta / d;

    SpeedProfile& p = plan.profile;
    p.accel = a_max;
    if (d >= v_max * v_max / a_max) {
        p.v_peak = v_max;
        p.t_accel = v_max / a_max;
        p.t_cruise = (d - v_max * v_max / a_max) / v_max;
    } else {
        p.v_peak = std::sqrt(d * a_max);
        p.t_accel = p.v_peak / a_max;
        p.t_cruise = 0.0;
    }
    p.t_decel = p.t_accel;
    return plan;
}

Reference sample(const TrajectoryPlan& plan, double t) {
    Reference ref;
    ref.yaw = plan.yaw;
    if (plan.empty()) {
        ref.position = plan.goal;
        return ref;
    }

    const SpeedProfile& p = plan.profile;
    const double tau = std::max(0.0, t - plan.start_time);
    const double t1 = p.t_accel;
    const double t2 = p.t_accel + p.t_cruise;
    const double total = p.duration();
    const double a = p.accel;

    double s = 0.0, v = 0.0, acc = 0.0;
    if (tau < t1) {
        s = 0.5 * a * tau * tau;
        v = a * tau;
        acc = a;
    } else if (tau < t2) {
        s = 0.5 * a * t1 * t1 + p.v_peak * (tau - t1);
        v = p.v_peak;
    } else if (tau < total) {
        const double rem = total - tau;
        s = plan.distance - 0.5 * a * rem * rem;
        v = a * rem;
        acc = -a;
    } else {
        ref.position = plan.goal;
        return ref;
    }

    ref.position = plan.start + plan.direction * s;
    ref.velocity = plan.direction * v;
    ref.acceleration = plan.direction * acc;
    return ref;
}

std::optional<AutonomyLevel> autonomy_from_int(int level) {
    if (level < 1 || level > 3) return std::nullopt;
    return static_cast<AutonomyLevel>(level);
}

bool DirectControlInput::valid() const {
    auto tri = [](int v) { return v >= -1 && v <= 1; };
    return tri(throttle) && tri(surge) && tri(yaw) && tri(slew);
}

Reference direct_reference(const DirectControlInput& input, const Reference& previous, double speed,
                           double yaw_rate, double dt) {
    Reference ref;
    ref.yaw = wrap_angle(previous.yaw + input.yaw * yaw_rate * dt);
    const double c = std::cos(ref.yaw);
    const double s = std::sin(ref.yaw);
    const double fwd = input.surge * speed;
    const double left = input.slew * speed;
    ref.velocity = {c * fwd - s * left, s * fwd + c * left, input.throttle * speed};
    ref.position = previous.position + ref.velocity * dt;
    if (ref.position.z < kDescentFloor) {
        ref.position.z = kDescentFloor;
        ref.velocity.z = 0.0;
    }
    return ref;
}

std::string_view command_name(const OperatorCommand& cmd) {
    return std::visit(overloaded{
                          [](const SetWaypoint&) { return std::string_view("set_waypoint"); },
                          [](const AppendWaypoint&) { return std::string_view("append_waypoint"); },
                          [](const DirectControl&) { return std::string_view("direct_control"); },
                          [](const SetSpeedScale&) { return std::string_view("set_speed_scale"); },
                          [](const Pause&) { return std::string_view("pause"); },
                          [](const Resume&) { return std::string_view("resume"); },
                          [](const TagEntity&) { return std::string_view("tag"); },
                      },
                      cmd);
}

bool valid_speed_scale(double scale) {
    return std::find(std::begin(kSpeedScales), std::end(kSpeedScales), scale) != std::end(kSpeedScales);
}

std::string_view reject_reason_name(RejectReason r) {
    switch (r) {
        case RejectReason::level_forbidden: return "level-forbidden";
        case RejectReason::single_uav_only: return "single-uav-only";
        case RejectReason::invalid_waypoint: return "invalid-waypoint";
        case RejectReason::battery_depleted: return "battery-depleted";
        case RejectReason::uav_crashed: return "uav-crashed";
        case RejectReason::not_visible: return "not-visible";
        case RejectReason::already_tagged: return "already-tagged";
        case RejectReason::unknown_id: return "unknown-id";
        case RejectReason::invalid_parameter: return "invalid-parameter";
    }
    return "unknown";
}

AutonomyDecision apply_autonomy(AutonomyLevel level, const OperatorCommand& cmd, const WaypointQueue& queue,
                                std::size_t selection_size) {
    AutonomyDecision out;
    out.queue = queue;
    auto reject = [&](RejectReason r) {
        out.accepted = false;
        out.reason = r;
        out.queue = queue;
        return out;
    };

    const bool flight_command = std::holds_alternative<DirectControl>(cmd) ||
                                std::holds_alternative<SetWaypoint>(cmd) ||
                                std::holds_alternative<AppendWaypoint>(cmd);
    if (level == AutonomyLevel::direct && flight_command && selection_size > 1)
        return reject(RejectReason::single_uav_only);

    out.accepted = true;
    std::visit(overloaded{
                   [&](const SetWaypoint& c) {
                       if (level == AutonomyLevel::direct) {
                           reject(RejectReason::level_forbidden);
                           return;
                       }
                       out.queue.items.clear();
                       out.queue.items.push_back({c.position, out.queue.next_id++});
                   },
                   [&](const AppendWaypoint& c) {
                       if (level != AutonomyLevel::waypoint_sequence) {
                           reject(RejectReason::level_forbidden);
                           return;
                       }
                       out.queue.items.push_back({c.position, out.queue.next_id++});
                   },
                   [&](const DirectControl&) { out.queue.items.clear(); },
                   [](const SetSpeedScale&) {},
                   [](const Pause&) {},
                   [](const Resume&) {},
                   [](const TagEntity&) {},
               },
               cmd);
    return out;
}

std::string_view nav_mode_name(NavMode m) {
    switch (m) {
        case NavMode::hover: return "hover";
        case NavMode::waypoint: return "waypoint";
        case NavMode::direct: return "direct";
        case NavMode::paused: return "paused";
        case NavMode::landing: return "landing";
    }
    return "hover";
}

Navigator::Navigator(const NavigatorLimits& limits, const Vec3& position) : limits_(limits) {
    last_ref_.position = position;
    last_ref_.yaw = limits.yaw;
}

void Navigator::hold(const Vec3& point) {
    mode_ = NavMode::hover;
    plan_.reset();
    last_ref_.position = point;
    last_ref_.velocity = {};
    last_ref_.acceleration = {};
}

void Navigator::set_queue(WaypointQueue queue, double now) {
    const bool front_changed =
        queue.items.empty() || !plan_ || queue_.items.empty() || queue.items.front().id != plan_->goal_id;
    queue_ = std::move(queue);
    if (queue_.items.empty()) {
        if (mode_ == NavMode::waypoint) hold(last_ref_.position);
        return;
    }
    if (mode_ == NavMode::paused) {
        mode_before_pause_ = NavMode::waypoint;
        plan_.reset();
        return;
    }
    if (mode_ != NavMode::waypoint || front_changed) {
        mode_ = NavMode::waypoint;
        replan(now);
    }
}

void Navigator::set_direct(const DirectControlInput& input) {
    queue_.items.clear();
    plan_.reset();
    direct_ = input;
    if (mode_ == NavMode::paused) {
        mode_before_pause_ = NavMode::direct;
        return;
    }
    if (mode_ != NavMode::direct) {
        last_ref_.velocity = {};
        last_ref_.acceleration = {};
    }
    mode_ = NavMode::direct;
}

void Navigator::pause() {
    if (mode_ == NavMode::paused || mode_ == NavMode::landing) return;
    mode_before_pause_ = mode_;
    mode_ = NavMode::paused;
    last_ref_.velocity = {};
    last_ref_.acceleration = {};
}

void Navigator::resume(double now) {
    if (mode_ != NavMode::paused) return;
    mode_ = mode_before_pause_;
    if (mode_ == NavMode::waypoint) {
        if (queue_.items.empty())
            hold(last_ref_.position);
        else
            replan(now);
    } else if (mode_ == NavMode::direct) {
        direct_ = {};
    }
}

void Navigator::land(double now) {
    queue_.items.clear();
    plan_.reset();
    direct_ = {};
    mode_ = NavMode::landing;
    landing_start_ = now;
    landing_from_ = last_ref_.position;
}

void Navigator::replan(double now) {
    const double v = limits_.v_max * speed_scale_;
    plan_ = plan_segment(last_ref_.position, queue_.items.front(), v, limits_.a_max, now, last_ref_.yaw);
    ++plan_id_;
}

std::vector<WaypointReached> Navigator::advance(const RigidState& state, double now) {
    std::vector<WaypointReached> events;
    if (mode_ != NavMode::waypoint) return events;
    if (!plan_) {
        if (!queue_.items.empty()) replan(now);
        return events;
    }
    if (now < plan_->end_time()) return events;
    if ((state.position - plan_->goal).norm() >= limits_.arrival_radius) return events;
    if (state.velocity.norm() >= limits_.arrival_speed) return events;

    const Waypoint reached = queue_.items.front();
    queue_.items.pop_front();
    last_ref_.position = plan_->goal;
    last_ref_.velocity = {};
    last_ref_.acceleration = {};
    events.push_back({reached, now, queue_.items.empty()});
    if (queue_.items.empty())
        hold(reached.position);
    else
        replan(now);
    return events;
}

Reference Navigator::reference(double now, double dt) {
    switch (mode_) {
        case NavMode::hover:
        case NavMode::paused:
            last_ref_.velocity = {};
            last_ref_.acceleration = {};
            break;
        case NavMode::waypoint:
            if (plan_) last_ref_ = sample(*plan_, now);
            break;
        case NavMode::direct:
            last_ref_ = direct_reference(direct_, last_ref_, limits_.v_max * speed_scale_, limits_.yaw_rate, dt);
            break;
        case NavMode::landing: {
            const double z = landing_from_.z - limits_.land_speed * (now - landing_start_);
            last_ref_.position = {landing_from_.x, landing_from_.y, std::max(z, kDescentFloor)};
            last_ref_.velocity = {0.0, 0.0, z > kDescentFloor ? -limits_.land_speed : 0.0};
            last_ref_.acceleration = {};
            break;
        }
    }
    return last_ref_;
}

}  // namespace rescue
