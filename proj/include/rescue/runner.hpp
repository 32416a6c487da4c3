#pragma once

// Wall-clock pacing for serve mode: one engine tick per timestep, inbound
// commands drained from the shared queue before each tick, outputs published
// to the gateway after it.

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>

#include "rescue/engine.hpp"
#include "rescue/gateway.hpp"

namespace rescue {

struct RunnerStats {
    std::uint64_t ticks = 0;
    std::uint64_t overruns = 0;  // ticks whose work finished after their deadline
    std::uint64_t snapshots = 0;
    double max_tick_seconds = 0.0;  // longest single tick, including publishing
};

class RealtimeRunner {
public:
    /// Receives each tick's commands and output, e.g. for logging.
    using Observer = std::function<void(const std::vector<StampedCommand>&, const TickOutput&)>;

    RealtimeRunner(Engine& engine, CommandQueue& queue, Gateway* gateway, Observer observer = {});

    /// Runs until `stop` is set or `max_ticks` ticks have elapsed.
    RunnerStats run(const std::atomic<bool>& stop, std::optional<std::uint64_t> max_ticks = std::nullopt);

private:
    Engine& engine_;
    CommandQueue& queue_;
    Gateway* gateway_;
    Observer observer_;
};

}  // namespace rescue
