#include "rescue/event_log.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "rescue/engine.hpp"
#include "rescue/format.hpp"
#include "rescue/protocol.hpp"

namespace rescue {

namespace pt = boost::property_tree;
using nlohmann::json;

namespace {

template <class T>
T parse_int(const std::string& s, const char* what, int base = 10) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw LogError(std::string("bad ") + what + " '" + s + "'");
    return v;
}

double parse_double(const std::string& s, const char* what) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
        throw LogError(std::string("bad ") + what + " '" + s + "'");
    return v;
}

std::string attr(const pt::ptree& node, const char* name) {
    const auto v = node.get_optional<std::string>(std::string("<xmlattr>.") + name);
    if (!v) throw LogError(std::string("missing attribute '") + name + "'");
    return *v;
}

}  // namespace

EventLog make_log(const SimConfig& config) {
    EventLog log;
    log.scenario_hash = scenario_hash(config);
    log.seed = config.seed;
    log.timestep = config.timestep;
    return log;
}

void write_log_xml(std::ostream& out, const EventLog& log) {
    pt::ptree root;
    pt::ptree& node = root.add_child("log", pt::ptree());
    node.put("<xmlattr>.version", log.version);
    node.put("<xmlattr>.scenario-hash", protocol::hash_hex(log.scenario_hash));
    node.put("<xmlattr>.seed", std::to_string(log.seed));
    node.put("<xmlattr>.dt", format_number(log.timestep));
    for (const EventRecord& e : log.events) {
        pt::ptree& ev = node.add_child("event", pt::ptree(e.payload.dump()));
        ev.put("<xmlattr>.tick", std::to_string(e.tick));
        ev.put("<xmlattr>.t", format_number(e.time));
        ev.put("<xmlattr>.src", std::string(event_source_name(e.source)));
        ev.put("<xmlattr>.kind", e.kind);
    }
    if (log.final_tick && log.final_hash) {
        pt::ptree& fin = node.add_child("final", pt::ptree());
        fin.put("<xmlattr>.tick", std::to_string(*log.final_tick));
        fin.put("<xmlattr>.hash", protocol::hash_hex(*log.final_hash));
    }
    pt::write_xml(out, root, pt::xml_writer_make_settings<std::string>(' ', 1));
}

EventLog read_log_xml(std::string_view xml) {
    pt::ptree doc;
    try {
        std::istringstream in{std::string(xml)};
        pt::read_xml(in, doc);
    } catch (const pt::xml_parser_error& ex) {
        throw LogError(std::string("XML parse error: ") + ex.what());
    }
    const auto root = doc.get_child_optional("log");
    if (!root) throw LogError("missing <log> root");

    EventLog log;
    log.version = parse_int<int>(attr(*root, "version"), "version");
    log.scenario_hash = parse_int<std::uint64_t>(attr(*root, "scenario-hash"), "scenario-hash", 16);
    log.seed = parse_int<std::uint64_t>(attr(*root, "seed"), "seed");
    log.timestep = parse_double(attr(*root, "dt"), "dt");
    for (const auto& [name, child] : *root) {
        if (name == "<xmlattr>" || name == "<xmlcomment>") continue;
        if (name == "event") {
            EventRecord e;
            e.time = parse_double(attr(child, "t"), "event time");
            if (const auto tick = child.get_optional<std::string>("<xmlattr>.tick"))
                e.tick = parse_int<std::uint64_t>(*tick, "event tick");
            else
                e.tick = static_cast<std::uint64_t>(std::llround(e.time / log.timestep));
            const auto source = event_source_from_name(attr(child, "src"));
            if (!source) throw LogError("unknown event source '" + attr(child, "src") + "'");
            e.source = *source;
            e.kind = attr(child, "kind");
            const std::string body = child.data();
            e.payload = body.empty() ? json::object() : json::parse(body, nullptr, false);
            if (e.payload.is_discarded() || !e.payload.is_object()) throw LogError("event payload is not a JSON object");
            if (!log.events.empty() && e.time < log.events.back().time) throw LogError("event timestamps decrease");
            log.events.push_back(std::move(e));
        } else if (name == "final") {
            log.final_tick = parse_int<std::uint64_t>(attr(child, "tick"), "final tick");
            log.final_hash = parse_int<std::uint64_t>(attr(child, "hash"), "final hash", 16);
        } else {
            throw LogError("unknown element <" + name + ">");
        }
    }
    return log;
}

EventLog read_log_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LogError("cannot open log file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return read_log_xml(buf.str());
}

void write_log_ndjson(std::ostream& out, const EventLog& log) {
    for (const EventRecord& e : log.events) out << protocol::to_json(e).dump() << '\n';
}

double actions_per_minute(std::span<const EventRecord> events, double start, double end) {
    if (!(end > start)) return 0.0;
    std::size_t count = 0;
    for (const EventRecord& e : events)
        if (e.kind == "command" && e.source == EventSource::operator_input && e.time >= start && e.time < end) ++count;
    return static_cast<double>(count) * 60.0 / (end - start);
}

std::vector<StampedCommand> logged_commands(const EventLog& log) {
    std::vector<StampedCommand> out;
    for (const EventRecord& e : log.events) {
        if (e.kind != "command" || e.source != EventSource::operator_input) continue;
        json payload = e.payload;
        if (!payload.contains("command") || !payload["command"].is_string())
            throw LogError("command event at tick " + std::to_string(e.tick) + " has no command kind");
        const std::string kind = payload["command"].get<std::string>();
        payload.erase("command");
        auto cmd = protocol::command_from_payload(kind, payload);
        if (!cmd) throw LogError("command event at tick " + std::to_string(e.tick) + ": " + cmd.error().path + ": " + cmd.error().message);
        out.push_back({e.tick, *cmd});
    }
    return out;
}

std::vector<StampedCommand> parse_command_script(std::string_view ndjson, double timestep) {
    std::vector<StampedCommand> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= ndjson.size()) {
        const std::size_t end = std::min(ndjson.find('\n', pos), ndjson.size());
        std::string_view line = ndjson.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;

        const std::string where = "script line " + std::to_string(line_no);
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw LogError(where + ": expected a JSON object");
        StampedCommand c;
        if (j.contains("tick") && j["tick"].is_number_unsigned()) {
            c.tick = j["tick"].get<std::uint64_t>();
        } else if (j.contains("t") && j["t"].is_number() && j["t"].get<double>() >= 0.0) {
            c.tick = static_cast<std::uint64_t>(std::llround(j["t"].get<double>() / timestep));
        } else {
            throw LogError(where + ": needs a non-negative \"tick\" or \"t\"");
        }
        if (!j.contains("kind") || !j["kind"].is_string()) throw LogError(where + ": missing \"kind\"");
        if (!j.contains("payload")) throw LogError(where + ": missing \"payload\"");
        for (const auto& [key, _] : j.items())
            if (key != "tick" && key != "t" && key != "kind" && key != "payload") throw LogError(where + ": unknown field \"" + key + "\"");
        auto cmd = protocol::command_from_payload(j["kind"].get<std::string>(), j["payload"]);
        if (!cmd) throw LogError(where + ": " + cmd.error().path + ": " + cmd.error().message);
        c.request = *cmd;
        out.push_back(std::move(c));
    }
    std::stable_sort(out.begin(), out.end(), [](const StampedCommand& a, const StampedCommand& b) { return a.tick < b.tick; });
    return out;
}

void check_compatible(const SimConfig& config, const EventLog& log) {
    if (log.version != kLogVersion)
        throw ReplayError("log version " + std::to_string(log.version) + " is not supported (expected " +
                          std::to_string(kLogVersion) + ")");
    if (log.seed != config.seed)
        throw ReplayError("log seed " + std::to_string(log.seed) + " does not match config seed " +
                          std::to_string(config.seed));
    if (log.scenario_hash != scenario_hash(config)) throw ReplayError("log was recorded with a different scenario");
}

ReplayResult replay(const SimConfig& config, const EventLog& log, std::optional<std::uint64_t> ticks) {
    check_compatible(config, log);

    std::vector<StampedCommand> commands;
    try {
        commands = logged_commands(log);
    } catch (const LogError& ex) {
        throw ReplayError(ex.what());
    }
    std::stable_sort(commands.begin(), commands.end(),
                     [](const StampedCommand& a, const StampedCommand& b) { return a.tick < b.tick; });

    std::uint64_t total = 0;
    if (ticks)
        total = *ticks;
    else if (log.final_tick)
        total = *log.final_tick;
    else if (!log.events.empty())
        total = log.events.back().tick;

    Engine engine(config);
    std::size_t next = 0;
    while (engine.tick_index() < total) {
        while (next < commands.size() && commands[next].tick <= engine.tick_index())
            engine.submit(commands[next++].request);
        engine.tick();
    }

    ReplayResult result;
    result.final_snapshot = engine.snapshot();
    result.hash = protocol::snapshot_hash(result.final_snapshot);
    if (!ticks || (log.final_tick && *ticks == *log.final_tick)) result.expected_hash = log.final_hash;
    return result;
}

}  // namespace rescue
