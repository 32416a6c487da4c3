#include "rescue/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <nlohmann/json.hpp>

#include "rescue/rng.hpp"

namespace rescue {

namespace pt = boost::property_tree;

namespace {

constexpr std::string_view kAttr = "<xmlattr>";

[[noreturn]] void invalid(const std::string& path, const std::string& msg) {
    throw ConfigError(ConfigError::Kind::validation, path, msg);
}

/// One XML element with attribute access that tracks which names were read,
/// so unread attributes can be rejected.
class Element {
public:
    Element(const pt::ptree& node, std::string path) : node_(node), path_(std::move(path)) {
        if (auto attrs = node_.get_child_optional(std::string(kAttr))) attrs_ = &*attrs;
    }

    [[nodiscard]] const std::string& path() const { return path_; }

    void allow(std::initializer_list<std::string_view> names) const {
        if (!attrs_) return;
        for (const auto& [name, _] : *attrs_) {
            bool known = false;
            for (std::string_view n : names) known = known || n == name;
            if (!known) invalid(path_ + "/@" + name, "unknown attribute");
        }
    }

    [[nodiscard]] bool has(std::string_view name) const {
        return attrs_ && attrs_->find(std::string(name)) != attrs_->not_found();
    }

    [[nodiscard]] std::string text(std::string_view name) const {
        return attrs_->get<std::string>(std::string(name));
    }

    double number(std::string_view name, double fallback) const {
        if (!has(name)) return fallback;
        return parse_number(text(name), attr_path(name));
    }

    std::uint64_t unsigned_integer(std::string_view name, std::uint64_t fallback) const {
        if (!has(name)) return fallback;
        const std::string s = text(name);
        std::uint64_t v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) invalid(attr_path(name), "expected unsigned integer, got '" + s + "'");
        return v;
    }

    int integer(std::string_view name, int fallback) const {
        if (!has(name)) return fallback;
        const std::string s = text(name);
        int v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) invalid(attr_path(name), "expected integer, got '" + s + "'");
        return v;
    }

    /// Whitespace-separated "x y z".
    Vec3 triple(std::string_view name, const Vec3& fallback) const {
        if (!has(name)) return fallback;
        std::istringstream in(text(name));
        std::string a, b, c, extra;
        if (!(in >> a >> b >> c) || (in >> extra)) invalid(attr_path(name), "expected three numbers");
        const std::string p = attr_path(name);
        return {parse_number(a, p), parse_number(b, p), parse_number(c, p)};
    }

    template <class Fn>
    void for_each_child(std::initializer_list<std::string_view> names, Fn&& fn) const {
        for (const auto& [name, child] : node_) {
            if (name == kAttr || name == "<xmlcomment>") continue;
            bool known = false;
            for (std::string_view n : names) known = known || n == name;
            if (!known) invalid(path_ + "/" + name, "unknown element");
            fn(name, Element(child, path_ + "/" + name));
        }
    }

    void no_children() const { for_each_child({}, [](const std::string&, const Element&) {}); }

    [[nodiscard]] std::string attr_path(std::string_view name) const { return path_ + "/@" + std::string(name); }

private:
    static double parse_number(const std::string& s, const std::string& path) {
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
            invalid(path, "expected finite number, got '" + s + "'");
        return v;
    }

    const pt::ptree& node_;
    const pt::ptree* attrs_ = nullptr;
    std::string path_;
};

AutonomyLevel parse_level(const Element& e, std::string_view name, AutonomyLevel fallback) {
    if (!e.has(name)) return fallback;
    const auto level = autonomy_from_int(e.integer(name, 0));
    if (!level) invalid(e.attr_path(name), "autonomy must be 1, 2 or 3");
    return *level;
}

void read_world(const Element& e, SimConfig& c) {
    e.allow({"width", "height", "timestep", "camera-fov"});
    e.no_children();
    c.world.width = e.number("width", c.world.width);
    c.world.height = e.number("height", c.world.height);
    c.timestep = e.number("timestep", c.timestep);
    if (e.has("camera-fov")) c.camera_fov = e.number("camera-fov", 0.0) * kPi / 180.0;
}

void read_physics(const Element& e, PhysicalParams& p) {
    e.allow({"mass", "gravity", "arm-length", "thrust-coeff", "moment-coeff", "ixx", "iyy", "izz", "motor-lag",
             "rotor-min", "rotor-max"});
    e.no_children();
    p.mass = e.number("mass", p.mass);
    p.gravity = e.number("gravity", p.gravity);
    p.arm_length = e.number("arm-length", p.arm_length);
    p.thrust_coeff = e.number("thrust-coeff", p.thrust_coeff);
    p.moment_coeff = e.number("moment-coeff", p.moment_coeff);
    p.inertia.x = e.number("ixx", p.inertia.x);
    p.inertia.y = e.number("iyy", p.inertia.y);
    p.inertia.z = e.number("izz", p.inertia.z);
    p.motor_lag = e.number("motor-lag", p.motor_lag);
    p.rotor_speed_min = e.number("rotor-min", p.rotor_speed_min);
    p.rotor_speed_max = e.number("rotor-max", p.rotor_speed_max);
}

void read_gains(const Element& e, Gains& g) {
    e.allow({"kp-pos", "kd-pos", "kp-att", "kd-att", "max-tilt"});
    e.no_children();
    g.kp_pos = e.triple("kp-pos", g.kp_pos);
    g.kd_pos = e.triple("kd-pos", g.kd_pos);
    g.kp_att = e.triple("kp-att", g.kp_att);
    g.kd_att = e.triple("kd-att", g.kd_att);
    g.max_tilt = e.number("max-tilt", g.max_tilt);
}

void read_navigator(const Element& e, NavigatorLimits& n) {
    e.allow({"v-max", "a-max", "arrival-radius", "arrival-speed", "min-altitude", "yaw", "yaw-rate", "land-speed"});
    e.no_children();
    n.v_max = e.number("v-max", n.v_max);
    n.a_max = e.number("a-max", n.a_max);
    n.arrival_radius = e.number("arrival-radius", n.arrival_radius);
    n.arrival_speed = e.number("arrival-speed", n.arrival_speed);
    n.min_altitude = e.number("min-altitude", n.min_altitude);
    n.yaw = e.number("yaw", n.yaw);
    n.yaw_rate = e.number("yaw-rate", n.yaw_rate);
    n.land_speed = e.number("land-speed", n.land_speed);
}

void read_battery(const Element& e, BatteryParams& b) {
    e.allow({"time-drain", "move-drain", "charge-rate", "low-threshold"});
    e.no_children();
    b.time_drain = e.number("time-drain", b.time_drain);
    b.move_drain = e.number("move-drain", b.move_drain);
    b.charge_rate = e.number("charge-rate", b.charge_rate);
    b.low_threshold = e.number("low-threshold", b.low_threshold);
}

void read_base(const Element& e, HomeBase& b) {
    e.allow({"x", "y", "radius"});
    e.no_children();
    b.x = e.number("x", b.x);
    b.y = e.number("y", b.y);
    b.radius = e.number("radius", b.radius);
}

void read_disturbance(const Element& e, Disturbance& d) {
    e.allow({"fx", "fy", "fz"});
    e.no_children();
    d.force.x = e.number("fx", d.force.x);
    d.force.y = e.number("fy", d.force.y);
    d.force.z = e.number("fz", d.force.z);
}

void read_logging(const Element& e, SimConfig& c) {
    e.allow({"snapshot-rate", "deviation-window"});
    e.no_children();
    c.snapshot_rate = e.number("snapshot-rate", c.snapshot_rate);
    c.deviation_window = e.number("deviation-window", c.deviation_window);
}

void read_entities(const Element& e, SimConfig& c) {
    e.allow({"persons", "cars", "helicopters", "fires", "person-speed", "car-speed", "helicopter-speed",
             "repick-probability"});
    c.entity_counts.persons = e.integer("persons", c.entity_counts.persons);
    c.entity_counts.cars = e.integer("cars", c.entity_counts.cars);
    c.entity_counts.helicopters = e.integer("helicopters", c.entity_counts.helicopters);
    c.entity_counts.fires = e.integer("fires", c.entity_counts.fires);
    c.walk.person_speed = e.number("person-speed", c.walk.person_speed);
    c.walk.car_speed = e.number("car-speed", c.walk.car_speed);
    c.walk.helicopter_speed = e.number("helicopter-speed", c.walk.helicopter_speed);
    c.walk.repick_probability = e.number("repick-probability", c.walk.repick_probability);

    const bool has_counts = e.has("persons") || e.has("cars") || e.has("helicopters") || e.has("fires");
    e.for_each_child({"entity"}, [&](const std::string&, const Element& child) {
        if (has_counts) invalid(child.path(), "explicit entity layout cannot be combined with count attributes");
        child.allow({"kind", "x", "y"});
        child.no_children();
        if (!child.has("kind")) invalid(child.attr_path("kind"), "missing");
        const auto kind = entity_kind_from_name(child.text("kind"));
        if (!kind) invalid(child.attr_path("kind"), "expected person, car, helicopter or fire");
        EntitySpawn s;
        s.kind = *kind;
        s.x = child.number("x", 0.0);
        s.y = child.number("y", 0.0);
        if (!c.world.contains(s.x, s.y)) invalid(child.path(), "entity outside world bounds");
        c.entity_layout.push_back(s);
    });
}

void read_uavs(const Element& e, SimConfig& c, std::vector<std::string>& warnings) {
    e.allow({"count", "autonomy"});
    const AutonomyLevel level = parse_level(e, "autonomy", AutonomyLevel::waypoint_sequence);
    const bool has_count = e.has("count");
    const int count = e.integer("count", 0);

    std::vector<UavSpawn> explicit_roster;
    const std::vector<UavSpawn> defaults = default_roster(c.base, kMaxUavs, level);
    e.for_each_child({"uav"}, [&](const std::string&, const Element& child) {
        child.allow({"color", "x", "y", "z", "autonomy"});
        child.no_children();
        const std::size_t index = explicit_roster.size();
        UavSpawn s = index < defaults.size() ? defaults[index] : defaults.back();
        if (child.has("color")) {
            const auto color = color_from_name(child.text("color"));
            if (!color) invalid(child.attr_path("color"), "expected red, yellow, green or blue");
            s.color = *color;
        }
        s.position.x = child.number("x", s.position.x);
        s.position.y = child.number("y", s.position.y);
        s.position.z = child.number("z", s.position.z);
        s.level = parse_level(child, "autonomy", level);
        explicit_roster.push_back(s);
    });

    if (!explicit_roster.empty()) {
        if (has_count && count != static_cast<int>(explicit_roster.size()))
            invalid(e.attr_path("count"), "count disagrees with the number of <uav> elements");
        c.uavs = std::move(explicit_roster);
    } else if (has_count) {
        if (count < 1 || count > kMaxUavs) invalid(e.attr_path("count"), "UAV count must be in [1, 16]");
        c.uavs = default_roster(c.base, count, level);
    } else {
        c.uavs = default_roster(c.base, 4, level);
    }
    if (c.uavs.size() > 4)
        warnings.push_back(std::to_string(c.uavs.size()) + " UAVs share 4 roster colors; colors repeat");
}

}  // namespace

void SimConfig::validate() const {
    auto wrap = [](const std::string& path, auto&& fn) {
        try {
            fn();
        } catch (const std::invalid_argument& ex) {
            invalid(path, ex.what());
        }
    };
    if (!(std::isfinite(timestep) && timestep > 0)) invalid("scenario/world/@timestep", "timestep must be > 0");
    if (!(std::isfinite(world.width) && world.width > 0)) invalid("scenario/world/@width", "must be > 0");
    if (!(std::isfinite(world.height) && world.height > 0)) invalid("scenario/world/@height", "must be > 0");
    if (!(camera_fov > 0 && camera_fov < kPi)) invalid("scenario/world/@camera-fov", "must be in (0, 180) degrees");
    wrap("scenario/physics", [&] { physics.validate(); });
    wrap("scenario/gains", [&] { gains.validate(); });
    wrap("scenario/navigator", [&] { navigator.validate(); });

    if (!(battery.time_drain >= 0 && battery.move_drain >= 0 && battery.charge_rate >= 0 &&
          battery.low_threshold >= 0 && battery.low_threshold <= 100))
        invalid("scenario/battery", "coefficients must be non-negative, threshold in [0, 100]");
    if (!(base.radius > 0) || !world.contains(base.x, base.y)) invalid("scenario/base", "base must lie inside the world with radius > 0");
    if (!disturbance.force.finite()) invalid("scenario/disturbance", "force must be finite");
    if (!(snapshot_rate > 0)) invalid("scenario/logging/@snapshot-rate", "must be > 0");
    if (!(deviation_window > 0)) invalid("scenario/logging/@deviation-window", "must be > 0");

    if (uavs.empty() || uavs.size() > static_cast<std::size_t>(kMaxUavs))
        invalid("scenario/uavs", "UAV count must be in [1, 16]");
    for (std::size_t i = 0; i < uavs.size(); ++i) {
        const Vec3& p = uavs[i].position;
        if (!p.finite() || !world.contains(p.x, p.y) || p.z < 0)
            invalid("scenario/uavs/uav[" + std::to_string(i) + "]", "spawn position outside world bounds");
    }
    if (entity_counts.persons < 0 || entity_counts.cars < 0 || entity_counts.helicopters < 0 || entity_counts.fires < 0)
        invalid("scenario/entities", "entity counts must be non-negative");
    if (!(walk.person_speed >= 0 && walk.car_speed >= 0 && walk.helicopter_speed >= 0 &&
          walk.repick_probability >= 0 && walk.repick_probability <= 1))
        invalid("scenario/entities", "speeds must be non-negative, repick probability in [0, 1]");
}

std::uint64_t SimConfig::snapshot_period() const {
    // 1/(20 * (1/60)) evaluates to 3.0000000000000004; the epsilon keeps it 3.
    const double ticks = 1.0 / (snapshot_rate * timestep);
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(ticks - 1e-9)));
}

std::vector<UavSpawn> default_roster(const HomeBase& base, int count, AutonomyLevel level) {
    static constexpr UavColor kColors[] = {UavColor::red, UavColor::yellow, UavColor::green, UavColor::blue};
    std::vector<UavSpawn> out;
    for (int i = 0; i < count; ++i) {
        UavSpawn s;
        s.color = kColors[i % 4];
        s.position = {base.x - 9.0 + 6.0 * (i % 4), base.y - 3.0 + 6.0 * (i / 4), 10.0};
        s.level = level;
        out.push_back(s);
    }
    return out;
}

SimConfig default_config() {
    SimConfig c;
    c.uavs = default_roster(c.base, 4);
    return c;
}

LoadedConfig load_config(std::string_view xml) {
    pt::ptree doc;
    try {
        std::istringstream in{std::string(xml)};
        pt::read_xml(in, doc, pt::xml_parser::no_comments | pt::xml_parser::trim_whitespace);
    } catch (const pt::xml_parser_error& ex) {
        throw ConfigError(ConfigError::Kind::parse, "", std::string("XML parse error: ") + ex.what());
    }

    const pt::ptree* root = nullptr;
    for (const auto& [name, child] : doc) {
        if (name == "<xmlcomment>") continue;
        if (name != "scenario" || root) invalid(name, "document root must be a single <scenario>");
        root = &child;
    }
    if (!root) invalid("", "missing <scenario> root");

    LoadedConfig out;
    SimConfig& c = out.config;
    const Element scenario(*root, "scenario");
    scenario.allow({"seed"});
    c.seed = scenario.unsigned_integer("seed", 0);

    // <base> feeds the default roster, so it is read before <uavs>.
    std::set<std::string> seen;
    scenario.for_each_child({"world", "physics", "gains", "navigator", "battery", "uavs", "entities", "base",
                             "disturbance", "logging"},
                            [&](const std::string& name, const Element& e) {
                                if (!seen.insert(name).second) invalid(e.path(), "duplicate element");
                                if (name == "base") read_base(e, c.base);
                            });
    bool have_uavs = false;
    scenario.for_each_child({"world", "physics", "gains", "navigator", "battery", "uavs", "entities", "base",
                             "disturbance", "logging"},
                            [&](const std::string& name, const Element& e) {
                                if (name == "world") read_world(e, c);
                                else if (name == "physics") read_physics(e, c.physics);
                                else if (name == "gains") read_gains(e, c.gains);
                                else if (name == "navigator") read_navigator(e, c.navigator);
                                else if (name == "battery") read_battery(e, c.battery);
                                else if (name == "disturbance") read_disturbance(e, c.disturbance);
                                else if (name == "logging") read_logging(e, c);
                            });
    // Entities and UAVs depend on world bounds and base being final.
    scenario.for_each_child({"world", "physics", "gains", "navigator", "battery", "uavs", "entities", "base",
                             "disturbance", "logging"},
                            [&](const std::string& name, const Element& e) {
                                if (name == "entities") read_entities(e, c);
                                if (name == "uavs") {
                                    read_uavs(e, c, out.warnings);
                                    have_uavs = true;
                                }
                            });
    if (!have_uavs) c.uavs = default_roster(c.base, 4);

    c.validate();
    return out;
}

LoadedConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(ConfigError::Kind::parse, path, "cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_config(buf.str());
}

std::uint64_t scenario_hash(const SimConfig& c) {
    using nlohmann::json;
    auto v3 = [](const Vec3& v) { return json::array({v.x, v.y, v.z}); };
    json j;
    j["seed"] = c.seed;
    j["world"] = {c.world.width, c.world.height, c.timestep, c.camera_fov};
    const PhysicalParams& p = c.physics;
    j["physics"] = {p.mass, p.gravity, p.arm_length, p.thrust_coeff, p.moment_coeff, v3(p.inertia),
                    p.motor_lag, p.rotor_speed_min, p.rotor_speed_max};
    j["gains"] = {v3(c.gains.kp_pos), v3(c.gains.kd_pos), v3(c.gains.kp_att), v3(c.gains.kd_att), c.gains.max_tilt};
    const NavigatorLimits& n = c.navigator;
    j["navigator"] = {n.v_max, n.a_max, n.arrival_radius, n.arrival_speed, n.min_altitude, n.yaw, n.yaw_rate,
                      n.land_speed};
    j["battery"] = {c.battery.time_drain, c.battery.move_drain, c.battery.charge_rate, c.battery.low_threshold};
    json uavs = json::array();
    for (const UavSpawn& u : c.uavs)
        uavs.push_back({static_cast<int>(u.color), v3(u.position), static_cast<int>(u.level)});
    j["uavs"] = uavs;
    j["counts"] = {c.entity_counts.persons, c.entity_counts.cars, c.entity_counts.helicopters, c.entity_counts.fires};
    json layout = json::array();
    for (const EntitySpawn& e : c.entity_layout) layout.push_back({static_cast<int>(e.kind), e.x, e.y});
    j["layout"] = layout;
    j["walk"] = {c.walk.person_speed, c.walk.car_speed, c.walk.helicopter_speed, c.walk.repick_probability};
    j["base"] = {c.base.x, c.base.y, c.base.radius};
    j["disturbance"] = v3(c.disturbance.force);
    j["logging"] = {c.snapshot_rate, c.deviation_window};
    return fnv1a64(j.dump());
}

}  // namespace rescue
