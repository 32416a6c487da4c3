#pragma once

// Run log: an XML document of engine events with a header identifying the
// scenario and a trailer holding the final snapshot hash, plus an optional
// newline-delimited JSON mirror. Replay re-injects the logged operator
// commands at their recorded ticks.

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rescue/config.hpp"
#include "rescue/snapshot.hpp"

namespace rescue {

inline constexpr int kLogVersion = 1;

struct EventLog {
    int version = kLogVersion;
    std::uint64_t scenario_hash = 0;
    std::uint64_t seed = 0;
    double timestep = 1.0 / 60.0;
    std::vector<EventRecord> events;
    std::optional<std::uint64_t> final_tick;
    std::optional<std::uint64_t> final_hash;

    bool operator==(const EventLog&) const = default;
};

class LogError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Header fields for a run of `config`.
EventLog make_log(const SimConfig& config);

void write_log_xml(std::ostream& out, const EventLog& log);
/// Throws LogError on malformed documents.
EventLog read_log_xml(std::string_view xml);
EventLog read_log_file(const std::string& path);

/// One event object per line.
void write_log_ndjson(std::ostream& out, const EventLog& log);

/// Operator command events per minute with time in [start, end).
double actions_per_minute(std::span<const EventRecord> events, double start, double end);

/// Operator commands recovered from the log's command events.
std::vector<StampedCommand> logged_commands(const EventLog& log);

/// Headless command script: one JSON object per line,
/// {"tick": n | "t": seconds, "kind": <command kind>, "payload": {...}}.
/// Blank lines and lines starting with '#' are skipped. Throws LogError.
std::vector<StampedCommand> parse_command_script(std::string_view ndjson, double timestep);

class ReplayError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ReplayResult {
    WorldSnapshot final_snapshot;
    std::uint64_t hash = 0;
    std::optional<std::uint64_t> expected_hash;

    /// True when the log carried no final hash or it equals the replayed one.
    [[nodiscard]] bool matches() const { return !expected_hash || *expected_hash == hash; }
};

/// Throws ReplayError unless the log was recorded with `config`.
void check_compatible(const SimConfig& config, const EventLog& log);

/// Re-runs `config` with the logged commands for `ticks` ticks (default: the
/// log's final tick, else its last event tick). Throws ReplayError on a
/// version, seed or scenario mismatch.
ReplayResult replay(const SimConfig& config, const EventLog& log, std::optional<std::uint64_t> ticks = std::nullopt);

}  // namespace rescue
