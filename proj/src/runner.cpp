#include "rescue/runner.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

namespace rescue {

RealtimeRunner::RealtimeRunner(Engine& engine, CommandQueue& queue, Gateway* gateway, Observer observer)
    : engine_(engine), queue_(queue), gateway_(gateway), observer_(std::move(observer)) {}

RunnerStats RealtimeRunner::run(const std::atomic<bool>& stop, std::optional<std::uint64_t> max_ticks) {
    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(engine_.config().timestep));
    RunnerStats stats;
    const auto start = clock::now();
    while (!stop.load(std::memory_order_relaxed) && (!max_ticks || stats.ticks < *max_ticks)) {
        const auto begin = clock::now();
        const std::vector<StampedCommand> commands = queue_.drain(engine_.tick_index());
        for (const StampedCommand& c : commands) engine_.submit(c.request);
        const TickOutput out = engine_.tick();
        if (gateway_) {
            for (const EventRecord& e : out.events) gateway_->publish_event(e);
            if (out.snapshot) gateway_->publish_snapshot(*out.snapshot);
        }
        if (out.snapshot) ++stats.snapshots;
        if (observer_) observer_(commands, out);

        ++stats.ticks;
        const auto end = clock::now();
        stats.max_tick_seconds = std::max(stats.max_tick_seconds, std::chrono::duration<double>(end - begin).count());
        const auto deadline = start + period * static_cast<long>(stats.ticks);
        if (end > deadline) ++stats.overruns;
        std::this_thread::sleep_until(deadline);
    }
    return stats;
}

}  // namespace rescue
