#include "rescue/gateway.hpp"

#include <algorithm>

namespace rescue {

using protocol::json;

std::uint64_t CommandQueue::push(CommandRequest request) {
    std::lock_guard lock(mutex_);
    pending_.push_back({next_tick_, std::move(request)});
    return next_tick_;
}

std::vector<StampedCommand> CommandQueue::drain(std::uint64_t tick) {
    std::lock_guard lock(mutex_);
    std::vector<StampedCommand> out;
    out.swap(pending_);
    for (StampedCommand& c : out) c.tick = tick;
    next_tick_ = tick + 1;
    return out;
}

std::uint64_t CommandQueue::next_tick() const {
    std::lock_guard lock(mutex_);
    return next_tick_;
}

Gateway::Gateway(CommandQueue& queue, std::vector<std::uint32_t> uav_ids, GatewayOptions options)
    : queue_(queue), uav_ids_(std::move(uav_ids)), options_(options) {}

SessionId Gateway::connect(Notify notify) {
    std::lock_guard lock(mutex_);
    const SessionId id = next_id_++;
    sessions_[id].notify = std::move(notify);
    return id;
}

void Gateway::disconnect(SessionId id) {
    std::lock_guard lock(mutex_);
    sessions_.erase(id);
    if (operator_ == id) operator_.reset();
}

std::size_t Gateway::session_count() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

std::optional<SessionId> Gateway::operator_session() const {
    std::lock_guard lock(mutex_);
    return operator_;
}

void Gateway::enqueue(Session& s, Item item) { s.outbox.push_back(std::move(item)); }

void Gateway::reply(Session& s, const protocol::ServerBody& body) {
    enqueue(s, {protocol::server_kind(body), std::make_shared<const std::string>(protocol::server_payload(body).dump())});
}

void Gateway::reject(Session& s, std::optional<std::uint64_t> ref_seq, std::string reason, std::string path,
                     std::string message) {
    reply(s, protocol::Reject{ref_seq, std::move(reason), std::move(path), std::move(message)});
}

void Gateway::receive(SessionId id, std::string_view text, double now) {
    Notify notify;
    {
        std::lock_guard lock(mutex_);
        const auto it = sessions_.find(id);
        if (it == sessions_.end()) return;
        Session& s = it->second;
        notify = s.notify;

        auto decoded = protocol::decode_client(text);
        if (!decoded) {
            // Echo the sequence number when it is readable so the client can match the reply.
            std::optional<std::uint64_t> seq;
            const json j = json::parse(text, nullptr, false);
            if (j.is_object() && j.contains("seq") && j["seq"].is_number_unsigned()) seq = j["seq"].get<std::uint64_t>();
            reject(s, seq, "schema", decoded.error().path, decoded.error().message);
        } else {
            const protocol::ClientMessage& msg = *decoded;
            auto unknown_id = [&](const std::vector<std::uint32_t>& ids) -> std::optional<std::size_t> {
                for (std::size_t i = 0; i < ids.size(); ++i)
                    if (std::find(uav_ids_.begin(), uav_ids_.end(), ids[i]) == uav_ids_.end()) return i;
                return std::nullopt;
            };

            if (const auto* hello = std::get_if<protocol::Hello>(&msg.body)) {
                if (s.greeted) {
                    reject(s, msg.seq, "protocol", "/kind", "session already established");
                } else if (hello->protocol_version != protocol::kProtocolVersion) {
                    reject(s, msg.seq, "version", "/payload/protocol_version",
                           "server speaks protocol version " + std::to_string(protocol::kProtocolVersion));
                } else {
                    s.greeted = true;
                    if (hello->role == "operator" && !operator_) {
                        operator_ = id;
                        s.is_operator = true;
                    }
                    reply(s, protocol::Welcome{id, s.is_operator ? "operator" : "observer", protocol::kProtocolVersion,
                                               queue_.next_tick(), uav_ids_});
                }
            } else if (!s.greeted) {
                reject(s, msg.seq, "not-ready", "/kind", "send hello first");
            } else if (const auto* select = std::get_if<protocol::Select>(&msg.body)) {
                if (const auto bad = unknown_id(select->uav_ids)) {
                    reject(s, msg.seq, "unknown-id", "/payload/uav_ids/" + std::to_string(*bad), "no such UAV");
                } else {
                    s.selection = select->uav_ids;
                    reply(s, protocol::Ack{msg.seq, queue_.next_tick()});
                }
            } else {
                const auto& cmd = std::get<CommandRequest>(msg.body);
                while (!s.recent.empty() && s.recent.front() <= now - options_.rate_window) s.recent.pop_front();
                if (!s.is_operator) {
                    reject(s, msg.seq, "observer", "", "only the operator session may command UAVs");
                } else if (const auto bad = unknown_id(cmd.uav_ids)) {
                    reject(s, msg.seq, "unknown-id", "/payload/uav_ids/" + std::to_string(*bad), "no such UAV");
                } else if (s.recent.size() >= options_.rate_limit) {
                    reject(s, msg.seq, "rate-limited", "",
                           "more than " + std::to_string(options_.rate_limit) + " commands per second");
                } else {
                    s.recent.push_back(now);
                    const std::uint64_t tick = queue_.push(cmd);
                    reply(s, protocol::Ack{msg.seq, tick});
                }
            }
        }
    }
    if (notify) notify();
}

void Gateway::publish_snapshot(const WorldSnapshot& snapshot) {
    auto payload = std::make_shared<const std::string>(protocol::canonical_text(snapshot));
    std::vector<Notify> notify;
    {
        std::lock_guard lock(mutex_);
        for (auto& [id, s] : sessions_) {
            if (!s.greeted) continue;
            // Latest wins: an undelivered snapshot is superseded, events stay.
            std::erase_if(s.outbox, [](const Item& i) { return i.kind == "snapshot"; });
            enqueue(s, {"snapshot", payload});
            if (s.notify) notify.push_back(s.notify);
        }
    }
    for (auto& n : notify) n();
}

void Gateway::publish_event(const EventRecord& event) {
    auto payload = std::make_shared<const std::string>(protocol::to_json(event).dump());
    std::vector<Notify> notify;
    {
        std::lock_guard lock(mutex_);
        for (auto& [id, s] : sessions_) {
            if (!s.greeted) continue;
            enqueue(s, {"event", payload});
            if (s.notify) notify.push_back(s.notify);
        }
    }
    for (auto& n : notify) n();
}

std::vector<std::string> Gateway::drain(SessionId id) {
    std::lock_guard lock(mutex_);
    std::vector<std::string> frames;
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) return frames;
    Session& s = it->second;
    frames.reserve(s.outbox.size());
    for (const Item& item : s.outbox) frames.push_back(protocol::frame(item.kind, s.next_seq++, *item.payload));
    s.outbox.clear();
    return frames;
}

}  // namespace rescue
