// rescue_sim: headless runs, the real-time operator server, and log replay.
//
// Exit codes: 0 ok, 1 usage error, 2 config error, 3 replay mismatch or
// unreadable/incompatible log, 4 I/O error.

#include <atomic>
#include <csignal>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rescue/config.hpp"
#include "rescue/engine.hpp"
#include "rescue/event_log.hpp"
#include "rescue/gateway.hpp"
#include "rescue/protocol.hpp"
#include "rescue/runner.hpp"
#include "rescue/summary.hpp"
#include "rescue/ws_server.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kReplay = 3, kIo = 4 };

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

struct Options {
    std::optional<std::uint16_t> serve;
    std::string bind = "127.0.0.1";
    bool headless = false;
    std::optional<double> duration;
    std::string replay;
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string log_out;
    std::string log_ndjson;
    std::string trajectory;
    std::string deviation;
    std::string summary;
    std::string script;
    bool full_rate = false;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

/// Collects the artifacts of one run: event log, CSV rows and the event list
/// for the summary.
class Recorder {
public:
    Recorder(const Options& opt, const rescue::SimConfig& config) : opt_(opt), log_(rescue::make_log(config)) {
        if (!opt_.trajectory.empty()) {
            trajectory_ = open_out(opt_.trajectory);
            rescue::write_trajectory_header(trajectory_);
        }
    }

    void on_tick(rescue::Engine& engine, const rescue::TickOutput& out) {
        for (const auto& e : out.events) log_.events.push_back(e);
        if (opt_.full_rate) {
            record(engine.snapshot());
        } else if (out.snapshot) {
            record(*out.snapshot);
        }
    }

    void finish(const rescue::Engine& engine) {
        log_.final_tick = engine.tick_index();
        log_.final_hash = rescue::protocol::snapshot_hash(engine.snapshot());
        if (!opt_.log_out.empty()) {
            auto out = open_out(opt_.log_out);
            rescue::write_log_xml(out, log_);
        }
        if (!opt_.log_ndjson.empty()) {
            auto out = open_out(opt_.log_ndjson);
            rescue::write_log_ndjson(out, log_);
        }
        if (!opt_.deviation.empty()) {
            auto out = open_out(opt_.deviation);
            rescue::write_deviation_csv(out, deviation_);
        }
        if (!opt_.summary.empty()) {
            auto out = open_out(opt_.summary);
            out << rescue::to_json(rescue::summarize(engine, log_.events)).dump(2) << '\n';
        }
    }

    [[nodiscard]] const rescue::EventLog& log() const { return log_; }

private:
    void record(const rescue::WorldSnapshot& s) {
        if (trajectory_.is_open()) rescue::write_trajectory_rows(trajectory_, s);
        if (!opt_.deviation.empty()) rescue::append_deviation_rows(deviation_, s);
    }

    const Options& opt_;
    rescue::EventLog log_;
    std::ofstream trajectory_;
    std::vector<rescue::DeviationRow> deviation_;
};

std::uint64_t ticks_for(double seconds, double dt) { return static_cast<std::uint64_t>(std::llround(seconds / dt)); }

/// Runs as fast as possible, injecting scripted commands at their ticks.
void run_batch(rescue::Engine& engine, const std::vector<rescue::StampedCommand>& commands, std::uint64_t ticks,
               Recorder& recorder) {
    std::size_t next = 0;
    while (engine.tick_index() < ticks) {
        while (next < commands.size() && commands[next].tick <= engine.tick_index()) engine.submit(commands[next++].request);
        const rescue::TickOutput out = engine.tick();
        recorder.on_tick(engine, out);
    }
}

int headless(const Options& opt, const rescue::SimConfig& config) {
    std::vector<rescue::StampedCommand> script;
    if (!opt.script.empty()) script = rescue::parse_command_script(read_file(opt.script), config.timestep);
    rescue::Engine engine(config);
    Recorder recorder(opt, config);
    run_batch(engine, script, ticks_for(opt.duration.value_or(60.0), config.timestep), recorder);
    recorder.finish(engine);
    std::cerr << "ran " << engine.tick_index() << " ticks (" << engine.time() << " s), final hash "
              << rescue::protocol::hash_hex(rescue::protocol::snapshot_hash(engine.snapshot())) << '\n';
    return kOk;
}

int replay(const Options& opt, const rescue::SimConfig& config) {
    rescue::EventLog log;
    std::vector<rescue::StampedCommand> commands;
    try {
        log = rescue::read_log_file(opt.replay);
        rescue::check_compatible(config, log);
        commands = rescue::logged_commands(log);
    } catch (const std::runtime_error& ex) {
        std::cerr << "replay: " << ex.what() << '\n';
        return kReplay;
    }
    std::uint64_t ticks = 0;
    if (opt.duration)
        ticks = ticks_for(*opt.duration, config.timestep);
    else if (log.final_tick)
        ticks = *log.final_tick;
    else if (!log.events.empty())
        ticks = log.events.back().tick;

    rescue::Engine engine(config);
    Recorder recorder(opt, config);
    run_batch(engine, commands, ticks, recorder);
    recorder.finish(engine);

    const std::uint64_t hash = rescue::protocol::snapshot_hash(engine.snapshot());
    if (log.final_hash && log.final_tick && *log.final_tick == ticks && *log.final_hash != hash) {
        std::cerr << "replay: final snapshot hash " << rescue::protocol::hash_hex(hash) << " differs from logged "
                  << rescue::protocol::hash_hex(*log.final_hash) << '\n';
        return kReplay;
    }
    std::cerr << "replay: " << ticks << " ticks, final hash " << rescue::protocol::hash_hex(hash)
              << (log.final_hash ? " (matches log)" : "") << '\n';
    return kOk;
}

int serve(const Options& opt, const rescue::SimConfig& config) {
    rescue::Engine engine(config);
    rescue::CommandQueue queue;
    std::vector<std::uint32_t> ids;
    for (const auto& u : engine.uavs()) ids.push_back(u.id);
    rescue::Gateway gateway(queue, ids);
    rescue::WsServer server(gateway, opt.bind, *opt.serve);
    server.start();
    std::cerr << "serving ws://" << opt.bind << ':' << server.port() << " at " << 1.0 / config.timestep << " Hz\n";

    Recorder recorder(opt, config);
    rescue::RealtimeRunner runner(engine, queue, &gateway,
                                  [&](const std::vector<rescue::StampedCommand>&, const rescue::TickOutput& out) {
                                      recorder.on_tick(engine, out);
                                  });
    std::optional<std::uint64_t> max_ticks;
    if (opt.duration) max_ticks = ticks_for(*opt.duration, config.timestep);
    const rescue::RunnerStats stats = runner.run(g_stop, max_ticks);
    server.stop();
    recorder.finish(engine);
    std::cerr << "served " << stats.ticks << " ticks, " << stats.snapshots << " snapshots, " << stats.overruns
              << " overruns, longest tick " << stats.max_tick_seconds * 1e3 << " ms\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-quadrotor search-and-rescue simulator"};
    Options opt;
    auto* serve_opt = app.add_option("--serve", opt.serve, "Real-time mode with the operator WebSocket gateway on PORT");
    app.add_option("--bind", opt.bind, "Gateway bind address")->capture_default_str();
    auto* headless_opt = app.add_flag("--headless", opt.headless, "Run at maximum speed without the gateway");
    app.add_option("--duration", opt.duration, "Simulated seconds (headless default 60; serve runs until SIGINT)")
        ->check(CLI::PositiveNumber);
    auto* replay_opt = app.add_option("--replay", opt.replay, "Replay an XML event log and verify its final hash");
    app.add_option("--config", opt.config, "Scenario XML file (default scenario if omitted)");
    app.add_option("--seed", opt.seed, "Override the scenario seed");
    app.add_option("--log-out", opt.log_out, "Write the XML event log");
    app.add_option("--log-ndjson", opt.log_ndjson, "Write the event log as newline-delimited JSON");
    app.add_option("--export-trajectory", opt.trajectory, "Trajectory CSV (t,uav,x,y,z,xt,yt,zt)");
    app.add_option("--export-deviation", opt.deviation, "Deviation CSV (t,uav,xt,yt,zt,x,y,z)");
    app.add_option("--summary", opt.summary, "Run summary JSON");
    app.add_option("--script", opt.script, "NDJSON command script for headless runs");
    app.add_flag("--full-rate", opt.full_rate, "Export CSV rows every physics tick instead of every snapshot");
    serve_opt->excludes(headless_opt)->excludes(replay_opt);
    headless_opt->excludes(replay_opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }
    const int modes = (opt.serve ? 1 : 0) + (opt.headless ? 1 : 0) + (opt.replay.empty() ? 0 : 1);
    if (modes != 1) {
        std::cerr << "choose exactly one of --serve, --headless, --replay\n";
        return kUsage;
    }
    if (!opt.script.empty() && !opt.headless) {
        std::cerr << "--script is only valid with --headless\n";
        return kUsage;
    }

    rescue::SimConfig config;
    try {
        if (opt.config.empty()) {
            config = rescue::default_config();
        } else {
            const rescue::LoadedConfig loaded = rescue::load_config_file(opt.config);
            for (const std::string& w : loaded.warnings) std::cerr << "config warning: " << w << '\n';
            config = loaded.config;
        }
        if (opt.seed) config.seed = *opt.seed;
        config.validate();
    } catch (const rescue::ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return kConfig;
    }

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    try {
        if (opt.serve) return serve(opt, config);
        if (opt.headless) return headless(opt, config);
        return replay(opt, config);
    } catch (const rescue::LogError& ex) {
        std::cerr << "script error: " << ex.what() << '\n';
        return kUsage;
    } catch (const IoError& ex) {
        std::cerr << ex.what() << '\n';
        return kIo;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kIo;
    }
}
