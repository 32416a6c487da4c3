#include "rescue/engine.hpp"

#include <algorithm>
#include <cmath>

#include "rescue/protocol.hpp"

namespace rescue {

using nlohmann::json;

namespace {

bool is_flight_command(const OperatorCommand& c) {
    return std::holds_alternative<SetWaypoint>(c) || std::holds_alternative<AppendWaypoint>(c) ||
           std::holds_alternative<DirectControl>(c) || std::holds_alternative<Resume>(c);
}

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

}  // namespace

Engine::Engine(SimConfig config) : config_(std::move(config)), entity_rng_(config_.seed, "entity-walk") {
    config_.validate();
    snapshot_period_ = config_.snapshot_period();

    Rng spawn_rng(config_.seed, "entity-spawn");
    entities_ = spawn_entities(config_.entity_counts, config_.entity_layout, config_.world, config_.walk, spawn_rng);

    const double hover = config_.physics.hover_speed();
    for (std::size_t i = 0; i < config_.uavs.size(); ++i) {
        const UavSpawn& spawn = config_.uavs[i];
        UavUnit u;
        u.id = static_cast<std::uint32_t>(i + 1);
        u.color = spawn.color;
        u.state.position = spawn.position;
        u.state.attitude.z = config_.navigator.yaw;
        u.level = spawn.level;
        u.status = spawn.position.z > 0.0 ? FlightStatus::flying : FlightStatus::grounded;
        uavs_.push_back(u);

        Slot s;
        s.nav = Navigator(config_.navigator, spawn.position);
        s.rotors = u.status == FlightStatus::flying ? RotorSpeeds::uniform(hover) : RotorSpeeds{};
        s.reference = s.nav.last_reference();
        s.disturbance = config_.disturbance;
        s.deviation = DeviationBuffer::for_window(config_.deviation_window, config_.snapshot_rate);
        slots_.push_back(std::move(s));
    }
}

std::optional<std::size_t> Engine::index_of(std::uint32_t uav_id) const {
    if (uav_id == 0 || uav_id > uavs_.size()) return std::nullopt;
    return uav_id - 1;
}

void Engine::set_disturbance(std::uint32_t uav_id, const Vec3& force) {
    if (const auto i = index_of(uav_id)) slots_[*i].disturbance.force = force;
}

void Engine::submit(CommandRequest request) { pending_.push_back(std::move(request)); }

void Engine::stage(TickStage s) {
    if (probe_) probe_(s, tick_);
}

EventRecord Engine::event(EventSource src, const char* kind, json payload, std::uint64_t tick) const {
    EventRecord e;
    e.tick = tick;
    e.time = static_cast<double>(tick) * config_.timestep;
    e.source = src;
    e.kind = kind;
    e.payload = std::move(payload);
    return e;
}

void Engine::apply_command(const CommandRequest& req, std::vector<EventRecord>& events) {
    json payload = protocol::command_payload(req);
    payload["command"] = command_name(req.command);
    events.push_back(event(EventSource::operator_input, "command", std::move(payload), tick_));

    // Duplicate ids in one request address the UAV once.
    CommandRequest unique = req;
    unique.uav_ids.clear();
    for (std::uint32_t id : req.uav_ids)
        if (std::find(unique.uav_ids.begin(), unique.uav_ids.end(), id) == unique.uav_ids.end())
            unique.uav_ids.push_back(id);

    for (std::uint32_t id : unique.uav_ids) {
        const auto index = index_of(id);
        if (!index) {
            events.push_back(event(EventSource::system, "reject",
                                   {{"uav", id},
                                    {"command", command_name(req.command)},
                                    {"reason", reject_reason_name(RejectReason::unknown_id)}},
                                   tick_));
            continue;
        }
        apply_to_uav(*index, unique, events);
    }
}

void Engine::apply_to_uav(std::size_t index, const CommandRequest& req, std::vector<EventRecord>& events) {
    UavUnit& uav = uavs_[index];
    Slot& slot = slots_[index];
    const double now = time();
    const OperatorCommand& cmd = req.command;

    auto reject = [&](RejectReason r) {
        events.push_back(event(
            EventSource::system, "reject",
            {{"uav", uav.id}, {"command", command_name(cmd)}, {"reason", reject_reason_name(r)}}, tick_));
    };

    if (uav.status == FlightStatus::crashed) return reject(RejectReason::uav_crashed);
    if (is_flight_command(cmd) && uav.battery <= 0.0) return reject(RejectReason::battery_depleted);

    if (const auto* w = std::get_if<SetWaypoint>(&cmd); w || std::holds_alternative<AppendWaypoint>(cmd)) {
        const Vec3 p = w ? w->position : std::get<AppendWaypoint>(cmd).position;
        if (!p.finite() || !config_.world.contains(p.x, p.y) || p.z < config_.navigator.min_altitude)
            return reject(RejectReason::invalid_waypoint);
    }
    if (const auto* d = std::get_if<DirectControl>(&cmd); d && !d->input.valid())
        return reject(RejectReason::invalid_parameter);
    if (const auto* s = std::get_if<SetSpeedScale>(&cmd); s && !valid_speed_scale(s->scale))
        return reject(RejectReason::invalid_parameter);

    if (const auto* t = std::get_if<TagEntity>(&cmd)) {
        const auto outcome = tag_entity(uav, t->entity_id, entities_, score_, config_.camera_fov);
        if (!outcome) return reject(outcome.error());
        events.push_back(event(EventSource::uav, "tag",
                               {{"uav", uav.id}, {"entity", outcome->entity_id}, {"kind", entity_kind_name(outcome->kind)}},
                               tick_));
        return;
    }

    const AutonomyDecision decision = apply_autonomy(uav.level, cmd, slot.nav.queue(), req.uav_ids.size());
    if (!decision.accepted) return reject(decision.reason);

    std::visit(overloaded{
                   [&](const SetWaypoint&) { slot.nav.set_queue(decision.queue, now); },
                   [&](const AppendWaypoint&) { slot.nav.set_queue(decision.queue, now); },
                   [&](const DirectControl& d) { slot.nav.set_direct(d.input); },
                   [&](const SetSpeedScale& s) { slot.nav.set_speed_scale(s.scale); },
                   [&](const Pause&) { slot.nav.pause(); },
                   [&](const Resume&) { slot.nav.resume(now); },
                   [](const TagEntity&) {},
               },
               cmd);
}

void Engine::ground(std::size_t index) {
    UavUnit& uav = uavs_[index];
    Slot& slot = slots_[index];
    uav.state.position.z = 0.0;
    uav.state.velocity = {};
    uav.state.body_rates = {};
    uav.state.attitude.x = 0.0;
    uav.state.attitude.y = 0.0;
    uav.status = FlightStatus::grounded;
    slot.rotors = {};
    if (slot.nav.mode() == NavMode::landing) slot.nav.hold(uav.state.position);
}

TickOutput Engine::tick() {
    TickOutput out;
    std::vector<EventRecord>& events = out.events;
    const double dt = config_.timestep;
    const double now = time();
    const std::uint64_t next_tick = tick_ + 1;

    // 1. Operator commands.
    std::vector<CommandRequest> requests;
    requests.swap(pending_);
    for (const CommandRequest& req : requests) apply_command(req, events);
    stage(TickStage::commands);

    // 2. Navigation.
    for (std::size_t i = 0; i < uavs_.size(); ++i) {
        UavUnit& uav = uavs_[i];
        Slot& slot = slots_[i];
        if (uav.status == FlightStatus::crashed) continue;
        for (const WaypointReached& r : slot.nav.advance(uav.state, now)) {
            ++slot.stats.waypoints_reached;
            events.push_back(event(EventSource::uav, "waypoint-reached",
                                   {{"uav", uav.id},
                                    {"waypoint", r.waypoint.id},
                                    {"position", vec_json(r.waypoint.position)},
                                    {"queue_empty", r.queue_empty}},
                                   tick_));
            if (r.queue_empty && config_.base.contains(r.waypoint.position.x, r.waypoint.position.y))
                slot.nav.land(now);
        }
        slot.reference = slot.nav.reference(now, dt);
    }
    stage(TickStage::navigation);

    // 3. Control.
    for (std::size_t i = 0; i < uavs_.size(); ++i) {
        UavUnit& uav = uavs_[i];
        Slot& slot = slots_[i];
        slot.commanded = {};
        slot.saturated = false;
        slot.sample.reset();
        if (uav.status == FlightStatus::crashed) continue;
        if (uav.status == FlightStatus::grounded) {
            if (uav.battery <= 0.0 || slot.reference.position.z <= kTakeoffAltitude) continue;
            // Rotors spin up on the ground before the weight comes off.
            uav.status = FlightStatus::flying;
            slot.rotors = RotorSpeeds::uniform(config_.physics.hover_speed());
        }
        const ControlOutput c = control_step(uav.state, slot.reference, config_.gains, config_.physics);
        slot.commanded = c.rotors;
        slot.saturated = c.saturated;
        slot.sample = DeviationSample{now, slot.reference.position, uav.state.position};
    }
    stage(TickStage::control);

    // 4. Dynamics and ground contact.
    for (std::size_t i = 0; i < uavs_.size(); ++i) {
        UavUnit& uav = uavs_[i];
        Slot& slot = slots_[i];
        if (uav.status != FlightStatus::flying) continue;
        const StepResult r = step(uav.state, slot.commanded, slot.rotors, slot.disturbance, config_.physics, dt);
        if (r.fault) {
            uav.status = FlightStatus::crashed;
            uav.state.velocity = {};
            uav.state.body_rates = {};
            slot.rotors = {};
            events.push_back(event(EventSource::uav, "crash", {{"uav", uav.id}, {"reason", "non-finite state"}}, next_tick));
            continue;
        }
        slot.stats.distance_flown += (r.state.position - uav.state.position).norm();
        uav.state = r.state;
        slot.rotors = r.rotors;
        if (uav.state.position.z < 0.0) {
            const double impact = -uav.state.velocity.z;
            if (impact > kCrashSpeed) {
                uav.state.position.z = 0.0;
                uav.state.velocity = {};
                uav.state.body_rates = {};
                uav.status = FlightStatus::crashed;
                slot.rotors = {};
                events.push_back(event(EventSource::uav, "crash",
                                       {{"uav", uav.id}, {"reason", "ground impact"}, {"speed", impact}}, next_tick));
            } else {
                ground(i);
                events.push_back(event(EventSource::uav, "landed",
                                       {{"uav", uav.id}, {"position", vec_json(uav.state.position)}}, next_tick));
            }
        }
    }
    stage(TickStage::dynamics);

    // 5. Battery.
    for (std::size_t i = 0; i < uavs_.size(); ++i) {
        UavUnit& uav = uavs_[i];
        if (uav.status == FlightStatus::crashed) continue;
        const double before = uav.battery;
        uav.battery = battery_step(uav, config_.base, config_.battery, dt);
        const double low = config_.battery.low_threshold;
        if (before > low && uav.battery <= low)
            events.push_back(event(EventSource::uav, "battery-low", {{"uav", uav.id}, {"battery", uav.battery}}, next_tick));
        if (before > 0.0 && uav.battery <= 0.0) {
            events.push_back(event(EventSource::uav, "battery-depleted", {{"uav", uav.id}}, next_tick));
            if (uav.status == FlightStatus::flying) slots_[i].nav.land(now + dt);
        }
    }
    stage(TickStage::battery);

    // 6. Entities and camera identification.
    step_entities(entities_, entity_rng_, config_.world, config_.walk, dt);
    for (const UavUnit& uav : uavs_) {
        if (uav.status != FlightStatus::flying) continue;
        for (std::uint32_t id : visible_entities(uav, entities_, config_.camera_fov)) {
            Entity& e = entities_[id - 1];
            if (e.identified) continue;
            score_.note_identified(e);
            events.push_back(event(EventSource::uav, "identify",
                                   {{"uav", uav.id}, {"entity", e.id}, {"kind", entity_kind_name(e.kind)}}, next_tick));
        }
    }
    stage(TickStage::entities);

    // 7. Telemetry.
    tick_ = next_tick;
    const bool snapshot_due = tick_ % snapshot_period_ == 0;
    for (std::size_t i = 0; i < uavs_.size(); ++i) {
        Slot& slot = slots_[i];
        if (!slot.sample) continue;
        const double err = slot.sample->residual().norm();
        if (slot.nav.mode() == NavMode::waypoint) {
            ++slot.stats.tracking_samples;
            slot.stats.tracking_error_sum += err;
            slot.stats.tracking_error_max = std::max(slot.stats.tracking_error_max, err);
        }
        if (snapshot_due) slot.deviation.record(*slot.sample);
    }
    stage(TickStage::telemetry);

    // 8. Events are already in pipeline order; attach the snapshot.
    if (snapshot_due) out.snapshot = snapshot();
    stage(TickStage::events);
    return out;
}

WorldSnapshot Engine::snapshot() const {
    WorldSnapshot s;
    s.tick = tick_;
    s.time = time();
    s.uavs.reserve(uavs_.size());
    for (std::size_t i = 0; i < uavs_.size(); ++i) {
        const UavUnit& u = uavs_[i];
        const Slot& slot = slots_[i];
        UavSnapshot v;
        v.id = u.id;
        v.color = u.color;
        v.state = u.state;
        v.rotors = slot.rotors;
        v.battery = u.battery;
        v.level = u.level;
        v.status = u.status;
        v.mode = slot.nav.mode();
        v.queue.assign(slot.nav.queue().items.begin(), slot.nav.queue().items.end());
        v.plan_id = slot.nav.plan_id();
        v.saturated = slot.saturated;
        v.reference = slot.reference;
        v.speed_scale = slot.nav.speed_scale();
        s.uavs.push_back(std::move(v));

        DeviationSummary d;
        d.uav = u.id;
        d.samples = slot.deviation.size();
        if (!slot.deviation.empty()) {
            d.error = slot.deviation.latest().residual().norm();
            const std::vector<DeviationSample> window = slot.deviation.window();
            if (const auto e = ellipse(window); e) d.ellipse = *e;
            if (const auto w = estimate_disturbance(window, config_.gains, config_.physics); w) d.wind = w->force;
        }
        s.deviation.push_back(d);
    }
    s.entities = entities_;
    s.score = score_;
    s.health = swarm_health(uavs_);
    return s;
}

}  // namespace rescue
