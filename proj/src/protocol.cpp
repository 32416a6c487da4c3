#include "rescue/protocol.hpp"

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <set>

#include "rescue/rng.hpp"

namespace rescue {

std::string_view event_source_name(EventSource s) {
    switch (s) {
        case EventSource::uav: return "uav";
        case EventSource::operator_input: return "operator";
        case EventSource::system: return "system";
    }
    return "system";
}

std::optional<EventSource> event_source_from_name(std::string_view s) {
    for (EventSource e : {EventSource::uav, EventSource::operator_input, EventSource::system})
        if (event_source_name(e) == s) return e;
    return std::nullopt;
}

namespace protocol {

namespace {

struct SchemaFailure {
    SchemaError error;
};

[[noreturn]] void fail(std::string path, std::string message) {
    throw SchemaFailure{{std::move(path), std::move(message)}};
}

template <class Enum, class NameFn>
std::optional<Enum> enum_from_name(std::string_view s, std::initializer_list<Enum> all, NameFn name) {
    for (Enum e : all)
        if (name(e) == s) return e;
    return std::nullopt;
}

std::string_view tag_status_name(TagStatus s) { return s == TagStatus::tagged ? "tagged" : "untagged"; }

/// Strict reader over one JSON object; every key must be consumed.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected object");
    }

    [[nodiscard]] std::string at(std::string_view key) const { return path_ + "/" + std::string(key); }

    const json& field(std::string_view key) {
        const auto it = j_.find(std::string(key));
        if (it == j_.end()) fail(at(key), "missing field");
        seen_.insert(std::string(key));
        return *it;
    }

    bool has(std::string_view key) const { return j_.contains(std::string(key)); }

    double number(std::string_view key) { return as_number(field(key), at(key)); }

    std::uint64_t unsigned_int(std::string_view key) { return as_unsigned(field(key), at(key)); }

    std::int64_t integer(std::string_view key) {
        const json& v = field(key);
        if (!v.is_number_integer()) fail(at(key), "expected integer");
        return v.get<std::int64_t>();
    }

    bool boolean(std::string_view key) {
        const json& v = field(key);
        if (!v.is_boolean()) fail(at(key), "expected boolean");
        return v.get<bool>();
    }

    std::string string(std::string_view key) {
        const json& v = field(key);
        if (!v.is_string()) fail(at(key), "expected string");
        return v.get<std::string>();
    }

    const json& array(std::string_view key) {
        const json& v = field(key);
        if (!v.is_array()) fail(at(key), "expected array");
        return v;
    }

    Vec3 vec3(std::string_view key) { return as_vec3(field(key), at(key)); }

    /// Rejects keys that were never read.
    void finish() const {
        for (const auto& [k, _] : j_.items())
            if (!seen_.count(k)) fail(at(k), "unknown field");
    }

    static double as_number(const json& v, const std::string& path) {
        if (!v.is_number()) fail(path, "expected number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(path, "expected finite number");
        return d;
    }

    static std::uint64_t as_unsigned(const json& v, const std::string& path) {
        if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
            fail(path, "expected non-negative integer");
        return v.get<std::uint64_t>();
    }

    static Vec3 as_vec3(const json& v, const std::string& path) {
        if (!v.is_array() || v.size() != 3) fail(path, "expected [x, y, z]");
        return {as_number(v[0], path + "/0"), as_number(v[1], path + "/1"), as_number(v[2], path + "/2")};
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

json vec(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json ids_json(const std::vector<std::uint32_t>& ids) {
    json a = json::array();
    for (std::uint32_t id : ids) a.push_back(id);
    return a;
}

std::vector<std::uint32_t> read_ids(Reader& r, bool require_nonempty) {
    const json& a = r.array("uav_ids");
    const std::string base = r.at("uav_ids");
    if (require_nonempty && a.empty()) fail(base, "must not be empty");
    std::vector<std::uint32_t> ids;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::uint64_t v = Reader::as_unsigned(a[i], base + "/" + std::to_string(i));
        if (v > 0xffffffffu) fail(base + "/" + std::to_string(i), "id out of range");
        ids.push_back(static_cast<std::uint32_t>(v));
    }
    return ids;
}

json reference_json(const Reference& r) {
    return {{"position", vec(r.position)}, {"velocity", vec(r.velocity)},
            {"acceleration", vec(r.acceleration)}, {"yaw", r.yaw}};
}

json uav_json(const UavSnapshot& u) {
    json queue = json::array();
    for (const Waypoint& w : u.queue) queue.push_back({{"id", w.id}, {"position", vec(w.position)}});
    return {{"id", u.id},
            {"color", color_name(u.color)},
            {"position", vec(u.state.position)},
            {"velocity", vec(u.state.velocity)},
            {"attitude", vec(u.state.attitude)},
            {"body_rates", vec(u.state.body_rates)},
            {"rotors", u.rotors.omega},
            {"battery", u.battery},
            {"autonomy", static_cast<int>(u.level)},
            {"status", flight_status_name(u.status)},
            {"mode", nav_mode_name(u.mode)},
            {"queue", queue},
            {"plan_id", u.plan_id},
            {"saturated", u.saturated},
            {"reference", reference_json(u.reference)},
            {"speed_scale", u.speed_scale}};
}

json entity_json(const Entity& e) {
    return {{"id", e.id},         {"kind", entity_kind_name(e.kind)},
            {"x", e.x},           {"y", e.y},
            {"heading", e.heading}, {"speed", e.speed},
            {"status", tag_status_name(e.status)}, {"identified", e.identified},
            {"target", json::array({e.target_x, e.target_y})}};
}

json ellipse_json(const ErrorEllipse& e) {
    return {{"center", json::array({e.center_x, e.center_y})},
            {"semi_major", e.semi_major},
            {"semi_minor", e.semi_minor},
            {"orientation", e.orientation},
            {"confidence", e.confidence},
            {"vertical_band", e.vertical_band}};
}

Reference read_reference(Reader r) {
    Reference ref;
    ref.position = r.vec3("position");
    ref.velocity = r.vec3("velocity");
    ref.acceleration = r.vec3("acceleration");
    ref.yaw = r.number("yaw");
    r.finish();
    return ref;
}

UavSnapshot read_uav(Reader r) {
    UavSnapshot u;
    u.id = static_cast<std::uint32_t>(r.unsigned_int("id"));
    const auto color = color_from_name(r.string("color"));
    if (!color) fail(r.at("color"), "unknown color");
    u.color = *color;
    u.state.position = r.vec3("position");
    u.state.velocity = r.vec3("velocity");
    u.state.attitude = r.vec3("attitude");
    u.state.body_rates = r.vec3("body_rates");
    const json& rotors = r.array("rotors");
    if (rotors.size() != 4) fail(r.at("rotors"), "expected 4 rotor speeds");
    for (std::size_t i = 0; i < 4; ++i) u.rotors.omega[i] = Reader::as_number(rotors[i], r.at("rotors") + "/" + std::to_string(i));
    u.battery = r.number("battery");
    const auto level = autonomy_from_int(static_cast<int>(r.integer("autonomy")));
    if (!level) fail(r.at("autonomy"), "autonomy must be 1, 2 or 3");
    u.level = *level;
    const auto status = enum_from_name<FlightStatus>(
        r.string("status"), {FlightStatus::grounded, FlightStatus::flying, FlightStatus::crashed}, flight_status_name);
    if (!status) fail(r.at("status"), "unknown flight status");
    u.status = *status;
    const auto mode = enum_from_name<NavMode>(
        r.string("mode"), {NavMode::hover, NavMode::waypoint, NavMode::direct, NavMode::paused, NavMode::landing},
        nav_mode_name);
    if (!mode) fail(r.at("mode"), "unknown navigation mode");
    u.mode = *mode;
    const json& queue = r.array("queue");
    for (std::size_t i = 0; i < queue.size(); ++i) {
        Reader w(queue[i], r.at("queue") + "/" + std::to_string(i));
        u.queue.push_back({w.vec3("position"), w.unsigned_int("id")});
        w.finish();
    }
    u.plan_id = r.unsigned_int("plan_id");
    u.saturated = r.boolean("saturated");
    u.reference = read_reference(Reader(r.field("reference"), r.at("reference")));
    u.speed_scale = r.number("speed_scale");
    r.finish();
    return u;
}

Entity read_entity(Reader r) {
    Entity e;
    e.id = static_cast<std::uint32_t>(r.unsigned_int("id"));
    const auto kind = entity_kind_from_name(r.string("kind"));
    if (!kind) fail(r.at("kind"), "unknown entity kind");
    e.kind = *kind;
    e.x = r.number("x");
    e.y = r.number("y");
    e.heading = r.number("heading");
    e.speed = r.number("speed");
    const auto status = enum_from_name<TagStatus>(r.string("status"), {TagStatus::untagged, TagStatus::tagged},
                                                  tag_status_name);
    if (!status) fail(r.at("status"), "unknown tag status");
    e.status = *status;
    e.identified = r.boolean("identified");
    const json& target = r.array("target");
    if (target.size() != 2) fail(r.at("target"), "expected [x, y]");
    e.target_x = Reader::as_number(target[0], r.at("target") + "/0");
    e.target_y = Reader::as_number(target[1], r.at("target") + "/1");
    r.finish();
    return e;
}

ErrorEllipse read_ellipse(Reader r) {
    ErrorEllipse e;
    const json& c = r.array("center");
    if (c.size() != 2) fail(r.at("center"), "expected [x, y]");
    e.center_x = Reader::as_number(c[0], r.at("center") + "/0");
    e.center_y = Reader::as_number(c[1], r.at("center") + "/1");
    e.semi_major = r.number("semi_major");
    e.semi_minor = r.number("semi_minor");
    e.orientation = r.number("orientation");
    e.confidence = r.number("confidence");
    e.vertical_band = r.number("vertical_band");
    r.finish();
    return e;
}

WorldSnapshot read_snapshot(Reader r) {
    WorldSnapshot s;
    s.tick = r.unsigned_int("tick");
    s.time = r.number("time");
    const json& uavs = r.array("uavs");
    for (std::size_t i = 0; i < uavs.size(); ++i) s.uavs.push_back(read_uav(Reader(uavs[i], r.at("uavs") + "/" + std::to_string(i))));
    const json& entities = r.array("entities");
    for (std::size_t i = 0; i < entities.size(); ++i)
        s.entities.push_back(read_entity(Reader(entities[i], r.at("entities") + "/" + std::to_string(i))));

    Reader score(r.field("score"), r.at("score"));
    s.score.persons_identified = static_cast<int>(score.unsigned_int("persons_identified"));
    s.score.persons_tagged = static_cast<int>(score.unsigned_int("persons_tagged"));
    s.score.cars_identified = static_cast<int>(score.unsigned_int("cars_identified"));
    s.score.cars_tagged = static_cast<int>(score.unsigned_int("cars_tagged"));
    score.finish();

    Reader health(r.field("health"), r.at("health"));
    s.health.mean_battery = health.number("mean_battery");
    s.health.min_battery = health.number("min_battery");
    s.health.flying = static_cast<int>(health.unsigned_int("flying"));
    s.health.grounded = static_cast<int>(health.unsigned_int("grounded"));
    s.health.crashed = static_cast<int>(health.unsigned_int("crashed"));
    health.finish();

    const json& dev = r.array("deviation");
    for (std::size_t i = 0; i < dev.size(); ++i) {
        Reader d(dev[i], r.at("deviation") + "/" + std::to_string(i));
        DeviationSummary sum;
        sum.uav = static_cast<std::uint32_t>(d.unsigned_int("uav"));
        sum.samples = d.unsigned_int("samples");
        sum.error = d.number("error");
        const json& el = d.field("ellipse");
        if (!el.is_null()) sum.ellipse = read_ellipse(Reader(el, d.at("ellipse")));
        const json& wind = d.field("wind");
        if (!wind.is_null()) sum.wind = Reader::as_vec3(wind, d.at("wind"));
        d.finish();
        s.deviation.push_back(sum);
    }
    r.finish();
    return s;
}

EventRecord read_event(Reader r) {
    EventRecord e;
    e.tick = r.unsigned_int("tick");
    e.time = r.number("time");
    const auto source = event_source_from_name(r.string("source"));
    if (!source) fail(r.at("source"), "unknown event source");
    e.source = *source;
    e.kind = r.string("kind");
    e.payload = r.field("payload");
    if (!e.payload.is_object()) fail(r.at("payload"), "expected object");
    r.finish();
    return e;
}

int read_axis(Reader& r, std::string_view key) {
    const std::int64_t v = r.integer(key);
    if (v < -1 || v > 1) fail(r.at(key), "expected -1, 0 or 1");
    return static_cast<int>(v);
}

CommandRequest read_command(std::string_view kind, Reader r) {
    CommandRequest c;
    c.uav_ids = read_ids(r, true);
    if (kind == "set_waypoint" || kind == "append_waypoint") {
        const Vec3 p{r.number("x"), r.number("y"), r.number("z")};
        if (kind == "set_waypoint")
            c.command = SetWaypoint{p};
        else
            c.command = AppendWaypoint{p};
    } else if (kind == "direct_control") {
        DirectControlInput in;
        in.throttle = read_axis(r, "throttle");
        in.surge = read_axis(r, "surge");
        in.yaw = read_axis(r, "yaw");
        in.slew = read_axis(r, "slew");
        c.command = DirectControl{in};
    } else if (kind == "set_speed_scale") {
        const double scale = r.number("scale");
        if (!valid_speed_scale(scale)) fail(r.at("scale"), "expected 0.5, 1 or 1.5");
        c.command = SetSpeedScale{scale};
    } else if (kind == "pause") {
        c.command = Pause{};
    } else if (kind == "resume") {
        c.command = Resume{};
    } else if (kind == "tag") {
        const std::uint64_t id = r.unsigned_int("entity_id");
        if (id > 0xffffffffu) fail(r.at("entity_id"), "id out of range");
        c.command = TagEntity{static_cast<std::uint32_t>(id)};
    } else {
        fail("/kind", "unknown command kind '" + std::string(kind) + "'");
    }
    r.finish();
    return c;
}

template <class T, class Fn>
Result<T, SchemaError> guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const SchemaFailure& f) {
        return f.error;
    }
}

json parse_frame_text(std::string_view text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) fail("", "malformed JSON");
    return j;
}

}  // namespace

json to_json(const WorldSnapshot& s) {
    json uavs = json::array();
    for (const UavSnapshot& u : s.uavs) uavs.push_back(uav_json(u));
    json entities = json::array();
    for (const Entity& e : s.entities) entities.push_back(entity_json(e));
    json dev = json::array();
    for (const DeviationSummary& d : s.deviation)
        dev.push_back({{"uav", d.uav},
                       {"samples", d.samples},
                       {"error", d.error},
                       {"ellipse", d.ellipse ? ellipse_json(*d.ellipse) : json(nullptr)},
                       {"wind", d.wind ? vec(*d.wind) : json(nullptr)}});
    return {{"tick", s.tick},
            {"time", s.time},
            {"uavs", uavs},
            {"entities", entities},
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
            {"deviation", dev}};
}

Result<WorldSnapshot, SchemaError> snapshot_from_json(const json& j) {
    return guarded<WorldSnapshot>([&] { return read_snapshot(Reader(j, "")); });
}

json to_json(const EventRecord& e) {
    return {{"tick", e.tick},
            {"time", e.time},
            {"source", event_source_name(e.source)},
            {"kind", e.kind},
            {"payload", e.payload}};
}

Result<EventRecord, SchemaError> event_from_json(const json& j) {
    return guarded<EventRecord>([&] { return read_event(Reader(j, "")); });
}

json command_payload(const CommandRequest& c) {
    json p = {{"uav_ids", ids_json(c.uav_ids)}};
    std::visit(overloaded{
                   [&](const SetWaypoint& w) {
                       p["x"] = w.position.x;
                       p["y"] = w.position.y;
                       p["z"] = w.position.z;
                   },
                   [&](const AppendWaypoint& w) {
                       p["x"] = w.position.x;
                       p["y"] = w.position.y;
                       p["z"] = w.position.z;
                   },
                   [&](const DirectControl& d) {
                       p["throttle"] = d.input.throttle;
                       p["surge"] = d.input.surge;
                       p["yaw"] = d.input.yaw;
                       p["slew"] = d.input.slew;
                   },
                   [&](const SetSpeedScale& s) { p["scale"] = s.scale; },
                   [](const Pause&) {},
                   [](const Resume&) {},
                   [&](const TagEntity& t) { p["entity_id"] = t.entity_id; },
               },
               c.command);
    return p;
}

Result<CommandRequest, SchemaError> command_from_payload(std::string_view kind, const json& payload) {
    return guarded<CommandRequest>([&] { return read_command(kind, Reader(payload, "/payload")); });
}

std::string canonical_text(const WorldSnapshot& s) { return to_json(s).dump(); }

std::uint64_t snapshot_hash(const WorldSnapshot& s) { return fnv1a64(canonical_text(s)); }

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string client_kind(const ClientBody& b) {
    return std::visit(overloaded{
                          [](const Hello&) { return std::string("hello"); },
                          [](const Select&) { return std::string("select"); },
                          [](const CommandRequest& c) { return std::string(command_name(c.command)); },
                      },
                      b);
}

std::string encode(const ClientMessage& m) {
    json payload = std::visit(overloaded{
                                  [](const Hello& h) {
                                      return json{{"role", h.role}, {"protocol_version", h.protocol_version}};
                                  },
                                  [](const Select& s) { return json{{"uav_ids", ids_json(s.uav_ids)}}; },
                                  [](const CommandRequest& c) { return command_payload(c); },
                              },
                              m.body);
    return json{{"kind", client_kind(m.body)}, {"seq", m.seq}, {"payload", payload}}.dump();
}

Result<ClientMessage, SchemaError> decode_client(std::string_view text) {
    return guarded<ClientMessage>([&] {
        const json j = parse_frame_text(text);
        Reader r(j, "");
        ClientMessage m;
        const std::string kind = r.string("kind");
        m.seq = r.unsigned_int("seq");
        Reader p(r.field("payload"), "/payload");
        if (kind == "hello") {
            Hello h;
            h.role = p.string("role");
            if (h.role != "operator" && h.role != "observer") fail("/payload/role", "expected operator or observer");
            h.protocol_version = p.integer("protocol_version");
            p.finish();
            m.body = h;
        } else if (kind == "select") {
            Select s;
            s.uav_ids = read_ids(p, false);
            p.finish();
            m.body = s;
        } else {
            m.body = read_command(kind, p);
        }
        r.finish();
        return m;
    });
}

std::string server_kind(const ServerBody& b) {
    return std::visit(overloaded{
                          [](const Welcome&) { return std::string("welcome"); },
                          [](const WorldSnapshot&) { return std::string("snapshot"); },
                          [](const EventRecord&) { return std::string("event"); },
                          [](const Ack&) { return std::string("ack"); },
                          [](const Reject&) { return std::string("reject"); },
                      },
                      b);
}

json server_payload(const ServerBody& b) {
    return std::visit(overloaded{
                          [](const Welcome& w) {
                              return json{{"session", w.session},
                                          {"role", w.role},
                                          {"protocol_version", w.protocol_version},
                                          {"tick", w.tick},
                                          {"uav_ids", ids_json(w.uav_ids)}};
                          },
                          [](const WorldSnapshot& s) { return to_json(s); },
                          [](const EventRecord& e) { return to_json(e); },
                          [](const Ack& a) { return json{{"ref_seq", a.ref_seq}, {"tick", a.tick}}; },
                          [](const Reject& r) {
                              return json{{"ref_seq", r.ref_seq ? json(*r.ref_seq) : json(nullptr)},
                                          {"reason", r.reason},
                                          {"path", r.path},
                                          {"message", r.message}};
                          },
                      },
                      b);
}

std::string encode(const ServerMessage& m) {
    return json{{"kind", server_kind(m.body)}, {"seq", m.seq}, {"payload", server_payload(m.body)}}.dump();
}

std::string frame(std::string_view kind, std::uint64_t seq, std::string_view payload_text) {
    // Sorted keys: kind < payload < seq, matching json::dump of the whole frame.
    std::string out;
    out.reserve(payload_text.size() + kind.size() + 48);
    out += "{\"kind\":";
    out += json(std::string(kind)).dump();
    out += ",\"payload\":";
    out += payload_text;
    out += ",\"seq\":";
    out += std::to_string(seq);
    out += '}';
    return out;
}

Result<ServerMessage, SchemaError> decode_server(std::string_view text) {
    return guarded<ServerMessage>([&] {
        const json j = parse_frame_text(text);
        Reader r(j, "");
        ServerMessage m;
        const std::string kind = r.string("kind");
        m.seq = r.unsigned_int("seq");
        const json& payload = r.field("payload");
        if (kind == "snapshot") {
            m.body = read_snapshot(Reader(payload, "/payload"));
        } else if (kind == "event") {
            m.body = read_event(Reader(payload, "/payload"));
        } else {
            Reader p(payload, "/payload");
            if (kind == "welcome") {
                Welcome w;
                w.session = p.unsigned_int("session");
                w.role = p.string("role");
                w.protocol_version = p.integer("protocol_version");
                w.tick = p.unsigned_int("tick");
                w.uav_ids = read_ids(p, false);
                m.body = w;
            } else if (kind == "ack") {
                m.body = Ack{p.unsigned_int("ref_seq"), p.unsigned_int("tick")};
            } else if (kind == "reject") {
                Reject rej;
                const json& ref = p.field("ref_seq");
                if (!ref.is_null()) rej.ref_seq = Reader::as_unsigned(ref, "/payload/ref_seq");
                rej.reason = p.string("reason");
                rej.path = p.string("path");
                rej.message = p.string("message");
                m.body = rej;
            } else {
                fail("/kind", "unknown server message kind '" + kind + "'");
            }
            p.finish();
        }
        r.finish();
        return m;
    });
}

}  // namespace protocol
}  // namespace rescue
