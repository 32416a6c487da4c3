#include "rescue/summary.hpp"

#include "rescue/config.hpp"
#include "rescue/event_log.hpp"
#include "rescue/format.hpp"
#include "rescue/protocol.hpp"

namespace rescue {

using nlohmann::json;

RunSummary summarize(const Engine& engine, std::span<const EventRecord> events) {
    RunSummary s;
    s.seed = engine.config().seed;
    s.ticks = engine.tick_index();
    s.duration = engine.time();
    s.scenario_hash = scenario_hash(engine.config());
    s.final_hash = protocol::snapshot_hash(engine.snapshot());
    for (std::size_t i = 0; i < engine.uavs().size(); ++i) {
        const UavUnit& u = engine.uavs()[i];
        const UavStats& st = engine.stats(i);
        UavSummary us;
        us.id = u.id;
        us.color = u.color;
        us.status = u.status;
        us.distance_flown = st.distance_flown;
        us.final_battery = u.battery;
        us.waypoints_reached = st.waypoints_reached;
        if (st.tracking_samples > 0) us.tracking = TrackingSummary{st.tracking_error_mean(), st.tracking_error_max, st.tracking_samples};
        s.uavs.push_back(us);
    }
    s.score = engine.score();
    s.health = swarm_health(engine.uavs());
    for (const EventRecord& e : events) {
        if (e.kind == "command") ++s.commands;
        if (e.kind == "reject") ++s.rejections;
    }
    if (s.commands > 0) s.apm = actions_per_minute(events, 0.0, s.duration);
    return s;
}

json to_json(const RunSummary& s) {
    json uavs = json::array();
    for (const UavSummary& u : s.uavs) {
        json t = nullptr;
        if (u.tracking) t = {{"mean", u.tracking->mean}, {"max", u.tracking->max}, {"samples", u.tracking->samples}};
        uavs.push_back({{"id", u.id},
                        {"color", color_name(u.color)},
                        {"status", flight_status_name(u.status)},
                        {"distance_flown", u.distance_flown},
                        {"final_battery", u.final_battery},
                        {"waypoints_reached", u.waypoints_reached},
                        {"tracking_error", t}});
    }
    return {{"seed", s.seed},
            {"ticks", s.ticks},
            {"duration", s.duration},
            {"scenario_hash", protocol::hash_hex(s.scenario_hash)},
            {"final_hash", protocol::hash_hex(s.final_hash)},
            {"uavs", uavs},
            {"score",
             {{"persons_identified", s.score.persons_identified},
              {"persons_tagged", s.score.persons_tagged},
              {"cars_identified", s.score.cars_identified},
              {"cars_tagged", s.score.cars_tagged}}},
            {"health",
             {{"mean_battery", s.health.mean_battery},
              {"min_battery", s.health.min_battery},
              {"flying", s.health.flying},
              {"grounded", s.health.grounded},
              {"crashed", s.health.crashed}}},
            {"commands", s.commands},
            {"rejections", s.rejections},
            {"apm", s.apm ? json(*s.apm) : json(nullptr)}};
}

void write_trajectory_header(std::ostream& out) { out << "t,uav,x,y,z,xt,yt,zt\n"; }

void write_trajectory_rows(std::ostream& out, const WorldSnapshot& s) {
    std::string line;
    for (const UavSnapshot& u : s.uavs) {
        line.clear();
        append_number(line, s.time);
        line += ',';
        line += std::to_string(u.id);
        const Vec3& p = u.state.position;
        const Vec3& r = u.reference.position;
        for (double v : {p.x, p.y, p.z, r.x, r.y, r.z}) {
            line += ',';
            append_number(line, v);
        }
        line += '\n';
        out << line;
    }
}

void append_deviation_rows(std::vector<DeviationRow>& rows, const WorldSnapshot& s) {
    for (const UavSnapshot& u : s.uavs) rows.push_back({s.time, u.id, u.reference.position, u.state.position});
}

}  // namespace rescue
