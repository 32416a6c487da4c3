#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "rescue/engine.hpp"
#include "rescue/event_log.hpp"
#include "rescue/protocol.hpp"

#include "support.hpp"

using namespace rescue;
using rescue::testing::single_uav_config;
using rescue::testing::to;

namespace {

std::vector<EventRecord> run_ticks(Engine& e, int n) {
    std::vector<EventRecord> all;
    for (int i = 0; i < n; ++i) {
        auto out = e.tick();
        all.insert(all.end(), out.events.begin(), out.events.end());
    }
    return all;
}

std::vector<EventRecord> of_kind(const std::vector<EventRecord>& es, const std::string& kind) {
    std::vector<EventRecord> out;
    std::copy_if(es.begin(), es.end(), std::back_inserter(out), [&](const EventRecord& e) { return e.kind == kind; });
    return out;
}

std::string reject_reason(const std::vector<EventRecord>& es) {
    const auto r = of_kind(es, "reject");
    return r.empty() ? "<none>" : r.front().payload.at("reason").get<std::string>();
}

/// Scripted mission on the default scenario; returns the snapshot stream text.
std::vector<std::string> scripted_stream(std::uint64_t seed) {
    SimConfig c = default_config();
    c.seed = seed;
    Engine e(c);
    std::vector<std::string> out;
    for (int i = 0; i < 1200; ++i) {
        if (i == 10) e.submit({{1, 2}, AppendWaypoint{{530, 520, 15}}});
        if (i == 20) e.submit({{3}, DirectControl{{0, 1, 1, 0}}});
        if (i == 400) e.submit({{1}, SetSpeedScale{1.5}});
        if (i == 500) e.submit({{2}, Pause{}});
        if (i == 700) e.submit({{2}, Resume{}});
        const TickOutput t = e.tick();
        if (t.snapshot) out.push_back(protocol::canonical_text(*t.snapshot));
    }
    return out;
}

}  // namespace

TEST(Engine, SameSeedSameStream) {
    const auto a = scripted_stream(5);
    const auto b = scripted_stream(5);
    ASSERT_EQ(a.size(), 400u);
    EXPECT_EQ(a, b);
    EXPECT_NE(scripted_stream(6), a);
}

TEST(Engine, StagesRunInPipelineOrder) {
    Engine e(default_config());
    std::vector<TickStage> seen;
    e.set_probe([&](TickStage s, std::uint64_t) { seen.push_back(s); });
    e.tick();
    e.tick();
    const std::vector<TickStage> one{TickStage::commands, TickStage::navigation, TickStage::control,
                                     TickStage::dynamics, TickStage::battery,    TickStage::entities,
                                     TickStage::telemetry, TickStage::events};
    std::vector<TickStage> two = one;
    two.insert(two.end(), one.begin(), one.end());
    EXPECT_EQ(seen, two);
}

TEST(Engine, HoverIsAFixedPoint) {
    Engine e(single_uav_config());
    run_ticks(e, 3600);
    EXPECT_EQ(e.uavs()[0].state.position, (Vec3{100, 100, 10}));
    EXPECT_EQ(e.stats(0).distance_flown, 0.0);
    EXPECT_EQ(e.tick_index(), 3600u);
    EXPECT_NEAR(e.time(), 60.0, 1e-12);
}

TEST(Engine, SnapshotCadence) {
    Engine e(default_config());
    int n = 0;
    for (int i = 0; i < 60; ++i) {
        const TickOutput t = e.tick();
        if (t.snapshot) {
            ++n;
            EXPECT_EQ(t.snapshot->tick % 3, 0u);
            EXPECT_EQ(t.snapshot->tick, e.tick_index());
        }
    }
    EXPECT_EQ(n, 20);
}

TEST(Engine, EventTicksNeverDecrease) {
    SimConfig c = default_config();
    Engine e(c);
    e.submit({{1, 2, 3, 4}, AppendWaypoint{{600, 600, 20}}});
    e.submit({{1, 99}, Pause{}});
    std::uint64_t last = 0;
    for (int i = 0; i < 1200; ++i) {
        for (const EventRecord& ev : e.tick().events) {
            EXPECT_GE(ev.tick, last);
            last = ev.tick;
        }
    }
}

TEST(Engine, CommandIsLoggedAtItsTick) {
    Engine e(single_uav_config());
    run_ticks(e, 5);
    e.submit(to(1, SetSpeedScale{0.5}));
    const auto es = e.tick().events;
    ASSERT_EQ(es.size(), 1u);
    EXPECT_EQ(es[0].kind, "command");
    EXPECT_EQ(es[0].tick, 5u);
    EXPECT_EQ(es[0].source, EventSource::operator_input);
    EXPECT_EQ(es[0].payload.at("command"), "set_speed_scale");
    EXPECT_EQ(e.navigator(0).speed_scale(), 0.5);
}

TEST(Engine, Rejections) {
    SimConfig c = single_uav_config({100, 100, 10}, AutonomyLevel::direct);
    c.uavs.push_back({UavColor::yellow, {120, 100, 10}, AutonomyLevel::direct});
    Engine e(c);
    auto submit_one = [&](CommandRequest r) {
        e.submit(std::move(r));
        return e.tick().events;
    };
    EXPECT_EQ(reject_reason(submit_one(to(99, Pause{}))), "unknown-id");
    EXPECT_EQ(reject_reason(submit_one(to(1, SetWaypoint{{10, 10, 10}}))), "level-forbidden");
    EXPECT_EQ(reject_reason(submit_one({{1, 2}, DirectControl{{1, 0, 0, 0}}})), "single-uav-only");
    EXPECT_EQ(reject_reason(submit_one(to(1, DirectControl{{3, 0, 0, 0}}))), "invalid-parameter");
    EXPECT_EQ(reject_reason(submit_one(to(1, SetSpeedScale{2.0}))), "invalid-parameter");
    EXPECT_EQ(reject_reason(submit_one(to(1, TagEntity{1}))), "unknown-id");

    Engine e3(single_uav_config());
    e3.submit(to(1, SetWaypoint{{-5, 10, 10}}));
    EXPECT_EQ(reject_reason(e3.tick().events), "invalid-waypoint");
    e3.submit(to(1, AppendWaypoint{{50, 10, 0.5}}));
    EXPECT_EQ(reject_reason(e3.tick().events), "invalid-waypoint");

    // Duplicate ids address the UAV once.
    e3.submit({{1, 1}, AppendWaypoint{{110, 100, 10}}});
    e3.tick();
    EXPECT_EQ(e3.navigator(0).queue().items.size(), 1u);
}

TEST(Engine, WaypointReachedEvent) {
    Engine e(single_uav_config());
    e.submit(to(1, AppendWaypoint{{110, 100, 10}}));
    const auto es = run_ticks(e, 600);
    const auto reached = of_kind(es, "waypoint-reached");
    ASSERT_EQ(reached.size(), 1u);
    EXPECT_EQ(reached[0].payload.at("waypoint"), 1);
    EXPECT_EQ(reached[0].payload.at("queue_empty"), true);
    EXPECT_EQ(e.stats(0).waypoints_reached, 1u);
    EXPECT_EQ(e.navigator(0).mode(), NavMode::hover);
    EXPECT_GT(e.stats(0).tracking_samples, 0u);
    EXPECT_NEAR(e.stats(0).distance_flown, 10.0, 0.5);
}

TEST(Engine, AutoLandAtBaseThenCharge) {
    SimConfig c = default_config();
    c.uavs = {UavSpawn{UavColor::red, {c.base.x + 40, c.base.y, 10}, AutonomyLevel::waypoint_sequence}};
    c.entity_counts = {0, 0, 0, 0};
    Engine e(c);
    e.submit(to(1, SetWaypoint{{c.base.x, c.base.y, 5}}));
    auto es = run_ticks(e, 60 * 60);
    ASSERT_EQ(of_kind(es, "landed").size(), 1u);
    EXPECT_EQ(e.uavs()[0].status, FlightStatus::grounded);
    EXPECT_EQ(e.uavs()[0].state.position.z, 0.0);
    EXPECT_TRUE(of_kind(es, "crash").empty());
    const double b0 = e.uavs()[0].battery;
    run_ticks(e, 60);
    EXPECT_NEAR(e.uavs()[0].battery, std::min(100.0, b0 + 1.0), 1e-9);

    // A new waypoint lifts it off again.
    e.submit(to(1, SetWaypoint{{c.base.x, c.base.y, 8}}));
    run_ticks(e, 60);
    EXPECT_EQ(e.uavs()[0].status, FlightStatus::flying);
}

TEST(Engine, HardDescentCrashes) {
    Engine e(single_uav_config({100, 100, 10}, AutonomyLevel::direct));
    e.submit(to(1, DirectControl{{-1, 0, 0, 0}}));
    const auto es = run_ticks(e, 600);
    ASSERT_EQ(of_kind(es, "crash").size(), 1u);
    EXPECT_EQ(of_kind(es, "crash")[0].payload.at("reason"), "ground impact");
    EXPECT_EQ(e.uavs()[0].status, FlightStatus::crashed);
    e.submit(to(1, DirectControl{{1, 0, 0, 0}}));
    EXPECT_EQ(reject_reason(e.tick().events), "uav-crashed");
}

TEST(Engine, BatteryDepletionLands) {
    SimConfig c = single_uav_config({100, 100, 3});
    c.battery.time_drain = 50.0;  // %/s
    c.battery.low_threshold = 20.0;
    Engine e(c);
    const auto es = run_ticks(e, 60 * 20);
    const auto low = of_kind(es, "battery-low");
    const auto dead = of_kind(es, "battery-depleted");
    ASSERT_EQ(low.size(), 1u);
    ASSERT_EQ(dead.size(), 1u);
    EXPECT_LT(low[0].tick, dead[0].tick);
    EXPECT_EQ(of_kind(es, "landed").size(), 1u);
    EXPECT_EQ(e.uavs()[0].status, FlightStatus::grounded);
    EXPECT_EQ(e.uavs()[0].battery, 0.0);
    e.submit(to(1, SetWaypoint{{100, 100, 10}}));
    EXPECT_EQ(reject_reason(e.tick().events), "battery-depleted");
}

TEST(Engine, IdentifyAndTag) {
    SimConfig c = single_uav_config({100, 100, 10});
    c.entity_layout = {{EntityKind::fire, 101, 101}, {EntityKind::fire, 300, 300}};
    Engine e(c);
    const auto first = e.tick().events;
    const auto seen = of_kind(first, "identify");
    ASSERT_EQ(seen.size(), 1u);
    EXPECT_EQ(seen[0].payload.at("entity"), 1);
    EXPECT_EQ(seen[0].tick, 1u);
    EXPECT_TRUE(of_kind(e.tick().events, "identify").empty());  // first sighting only

    e.submit(to(1, TagEntity{2}));
    EXPECT_EQ(reject_reason(e.tick().events), "not-visible");
    e.submit(to(1, TagEntity{1}));
    ASSERT_EQ(of_kind(e.tick().events, "tag").size(), 1u);
    EXPECT_EQ(e.entities()[0].status, TagStatus::tagged);
    e.submit(to(1, TagEntity{1}));
    EXPECT_EQ(reject_reason(e.tick().events), "already-tagged");
}

TEST(Engine, ScoresCountPersonsAndCars) {
    SimConfig c = single_uav_config({100, 100, 10});
    c.entity_layout = {{EntityKind::person, 100, 100}, {EntityKind::car, 102, 100}, {EntityKind::helicopter, 98, 100}};
    c.walk = {0.0, 0.0, 0.0, 0.0};
    Engine e(c);
    e.tick();
    EXPECT_EQ(e.score().persons_identified, 1);
    EXPECT_EQ(e.score().cars_identified, 1);
    e.submit(to(1, TagEntity{2}));
    e.tick();
    EXPECT_EQ(e.score().cars_tagged, 1);
    EXPECT_EQ(e.score().persons_tagged, 0);
}

TEST(Engine, DeviationWindowFillsOnSnapshots) {
    Engine e(single_uav_config());
    run_ticks(e, 3 * 10);
    EXPECT_EQ(e.deviation(0).size(), 10u);
    run_ticks(e, 3 * 200);
    EXPECT_EQ(e.deviation(0).size(), e.deviation(0).capacity());
    const WorldSnapshot s = e.snapshot();
    ASSERT_EQ(s.deviation.size(), 1u);
    ASSERT_TRUE(s.deviation[0].ellipse);
    EXPECT_EQ(s.deviation[0].ellipse->semi_major, 0.0);
    ASSERT_TRUE(s.deviation[0].wind);
    EXPECT_EQ(*s.deviation[0].wind, Vec3{});
}

TEST(Engine, ConstructorValidates) {
    SimConfig c = default_config();
    c.timestep = 0.0;
    EXPECT_THROW(Engine{c}, ConfigError);
}

TEST(EventLog, ApmExamples) {
    auto commands_at = [](int n, double spacing) {
        std::vector<EventRecord> es;
        for (int i = 0; i < n; ++i)
            es.push_back({static_cast<std::uint64_t>(i), i * spacing, EventSource::operator_input, "command", {}});
        return es;
    };
    const auto thirty = commands_at(30, 10.0);
    EXPECT_DOUBLE_EQ(actions_per_minute(thirty, 0.0, 300.0), 6.0);
    EXPECT_EQ(actions_per_minute({}, 0.0, 60.0), 0.0);
    const auto sixty = commands_at(60, 1.0);
    EXPECT_DOUBLE_EQ(actions_per_minute(sixty, 0.0, 60.0), 60.0);
    EXPECT_EQ(actions_per_minute(sixty, 5.0, 5.0), 0.0);

    auto mixed = sixty;
    mixed.push_back({0, 0.5, EventSource::system, "reject", {}});
    EXPECT_DOUBLE_EQ(actions_per_minute(mixed, 0.0, 60.0), 60.0);
}

TEST(EventLog, XmlRoundTripAndReplay) {
    SimConfig c = default_config();
    c.seed = 11;
    Engine e(c);
    EventLog log = make_log(c);
    for (int i = 0; i < 900; ++i) {
        if (i == 30) e.submit({{1, 2}, AppendWaypoint{{520, 470, 12}}});
        if (i == 31) e.submit({{1}, AppendWaypoint{{530, 470, 12}}});
        if (i == 200) e.submit({{4}, DirectControl{{1, 0, 1, 0}}});
        if (i == 260) e.submit({{4}, DirectControl{{0, 0, 0, 0}}});
        for (auto& ev : e.tick().events) log.events.push_back(ev);
    }
    log.final_tick = e.tick_index();
    log.final_hash = protocol::snapshot_hash(e.snapshot());

    std::ostringstream xml;
    write_log_xml(xml, log);
    const EventLog back = read_log_xml(xml.str());
    EXPECT_EQ(back, log);

    const ReplayResult r = replay(c, back);
    EXPECT_TRUE(r.matches());
    EXPECT_EQ(r.final_snapshot, e.snapshot());

    EventLog tampered = back;
    for (auto& ev : tampered.events)
        if (ev.kind == "command") {
            ++ev.tick;
            break;
        }
    EXPECT_FALSE(replay(c, tampered).matches());

    SimConfig other = c;
    other.seed = 12;
    EXPECT_THROW(check_compatible(other, back), ReplayError);
    other = c;
    other.navigator.v_max = 4.0;
    EXPECT_THROW(replay(other, back), ReplayError);
}

TEST(EventLog, MalformedXml) {
    EXPECT_THROW(read_log_xml("<log"), LogError);
    EXPECT_THROW(read_log_xml("<other/>"), LogError);
    EXPECT_THROW(read_log_xml(R"(<log version="1" scenario-hash="zz" seed="0" dt="0.1"/>)"), LogError);
}

TEST(EventLog, NdjsonOneLinePerEvent) {
    EventLog log = make_log(default_config());
    log.events = {{0, 0.0, EventSource::operator_input, "command", {{"command", "pause"}, {"uav_ids", {1}}}},
                  {1, 1.0 / 60, EventSource::uav, "landed", {{"uav", 1}}}};
    std::ostringstream out;
    write_log_ndjson(out, log);
    const std::string text = out.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
    const auto first = nlohmann::json::parse(text.substr(0, text.find('\n')));
    EXPECT_EQ(first.at("kind"), "command");
}

TEST(EventLog, CommandScript) {
    const auto cmds = parse_command_script(
        "# mission\n"
        "{\"tick\": 3, \"kind\": \"pause\", \"payload\": {\"uav_ids\": [1]}}\n"
        "\n"
        "{\"t\": 1.0, \"kind\": \"set_waypoint\", \"payload\": {\"uav_ids\": [2], \"x\": 1, \"y\": 2, \"z\": 3}}\r\n",
        1.0 / 60.0);
    ASSERT_EQ(cmds.size(), 2u);
    EXPECT_EQ(cmds[0].tick, 3u);
    EXPECT_EQ(cmds[1].tick, 60u);
    EXPECT_EQ(cmds[1].request, (CommandRequest{{2}, SetWaypoint{{1, 2, 3}}}));

    EXPECT_THROW(parse_command_script("{\"kind\": \"pause\", \"payload\": {}}", 0.1), LogError);
    EXPECT_THROW(parse_command_script("{\"tick\": 1, \"kind\": \"pause\", \"payload\": {\"uav_ids\": []}}", 0.1),
                 LogError);
    EXPECT_THROW(parse_command_script("not json", 0.1), LogError);
}
