#pragma once

// Transport-independent operator gateway: session handshake, structural
// command validation, rate limiting, tick stamping into the engine's inbound
// queue, and per-session outboxes where events are lossless and snapshots are
// latest-wins.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rescue/protocol.hpp"
#include "rescue/snapshot.hpp"

namespace rescue {

/// Ordered inbound queue shared by network sessions and the engine thread.
/// Commands pushed before drain(k) are stamped k and applied at tick k.
class CommandQueue {
public:
    /// Returns the tick at which the command will be applied.
    std::uint64_t push(CommandRequest request);
    std::vector<StampedCommand> drain(std::uint64_t tick);
    [[nodiscard]] std::uint64_t next_tick() const;

private:
    mutable std::mutex mutex_;
    std::uint64_t next_tick_ = 0;
    std::vector<StampedCommand> pending_;
};

struct GatewayOptions {
    std::size_t rate_limit = 20;  // commands per window
    double rate_window = 1.0;     // s
};

using SessionId = std::uint64_t;

class Gateway {
public:
    Gateway(CommandQueue& queue, std::vector<std::uint32_t> uav_ids, GatewayOptions options = {});

    /// Called whenever a session's outbox gains frames; may run on any thread.
    using Notify = std::function<void()>;

    SessionId connect(Notify notify = {});
    void disconnect(SessionId id);

    /// Handles one inbound text frame received at wall time `now` (s).
    void receive(SessionId id, std::string_view text, double now);

    void publish_snapshot(const WorldSnapshot& snapshot);
    void publish_event(const EventRecord& event);

    /// Pending frames for the session, in delivery order, with sequence
    /// numbers assigned now.
    std::vector<std::string> drain(SessionId id);

    [[nodiscard]] std::size_t session_count() const;
    [[nodiscard]] std::optional<SessionId> operator_session() const;

private:
    struct Item {
        std::string kind;
        std::shared_ptr<const std::string> payload;
    };
    struct Session {
        bool greeted = false;
        bool is_operator = false;
        std::vector<std::uint32_t> selection;
        std::deque<double> recent;  // accepted command times within the window
        std::deque<Item> outbox;
        std::uint64_t next_seq = 1;
        Notify notify;
    };

    void enqueue(Session& s, Item item);
    void reply(Session& s, const protocol::ServerBody& body);
    void reject(Session& s, std::optional<std::uint64_t> ref_seq, std::string reason, std::string path,
                std::string message);

    CommandQueue& queue_;
    std::vector<std::uint32_t> uav_ids_;
    GatewayOptions options_;
    mutable std::mutex mutex_;
    std::map<SessionId, Session> sessions_;
    SessionId next_id_ = 1;
    std::optional<SessionId> operator_;
};

}  // namespace rescue
