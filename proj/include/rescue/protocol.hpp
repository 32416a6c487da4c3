#pragma once

// Operator wire protocol. Every frame is one JSON object {kind, seq, payload}
// with sorted keys. Decoding is strict: unknown fields, wrong types and
// missing fields are reported with a JSON-pointer path such as
// "/payload/uav_ids/1".

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "rescue/result.hpp"
#include "rescue/snapshot.hpp"

namespace rescue::protocol {

using nlohmann::json;

inline constexpr std::int64_t kProtocolVersion = 1;

struct SchemaError {
    std::string path;
    std::string message;
};

// Domain values.
json to_json(const WorldSnapshot& s);
Result<WorldSnapshot, SchemaError> snapshot_from_json(const json& j);

json to_json(const EventRecord& e);
Result<EventRecord, SchemaError> event_from_json(const json& j);

/// Payload fields of a UAV-addressed command (uav_ids plus per-kind fields).
json command_payload(const CommandRequest& c);
Result<CommandRequest, SchemaError> command_from_payload(std::string_view kind, const json& payload);

/// Canonical snapshot text; its FNV-1a hash identifies a world state.
std::string canonical_text(const WorldSnapshot& s);
std::uint64_t snapshot_hash(const WorldSnapshot& s);
std::string hash_hex(std::uint64_t h);

// Client -> server.
struct Hello {
    std::string role;  // "operator" or "observer"
    std::int64_t protocol_version = kProtocolVersion;
    bool operator==(const Hello&) const = default;
};

struct Select {
    std::vector<std::uint32_t> uav_ids;
    bool operator==(const Select&) const = default;
};

using ClientBody = std::variant<Hello, Select, CommandRequest>;

struct ClientMessage {
    std::uint64_t seq = 0;
    ClientBody body;
    bool operator==(const ClientMessage&) const = default;
};

std::string client_kind(const ClientBody& b);
std::string encode(const ClientMessage& m);
Result<ClientMessage, SchemaError> decode_client(std::string_view text);

// Server -> client.
struct Welcome {
    std::uint64_t session = 0;
    std::string role;
    std::int64_t protocol_version = kProtocolVersion;
    std::uint64_t tick = 0;
    std::vector<std::uint32_t> uav_ids;
    bool operator==(const Welcome&) const = default;
};

struct Ack {
    std::uint64_t ref_seq = 0;
    std::uint64_t tick = 0;  // engine tick at which the command applies
    bool operator==(const Ack&) const = default;
};

struct Reject {
    std::optional<std::uint64_t> ref_seq;  // absent when the frame had no readable seq
    std::string reason;                    // schema, not-ready, observer, unknown-id, rate-limited, version
    std::string path;                      // offending field, empty if not field-specific
    std::string message;
    bool operator==(const Reject&) const = default;
};

using ServerBody = std::variant<Welcome, WorldSnapshot, EventRecord, Ack, Reject>;

struct ServerMessage {
    std::uint64_t seq = 0;
    ServerBody body;
    bool operator==(const ServerMessage&) const = default;
};

std::string server_kind(const ServerBody& b);
json server_payload(const ServerBody& b);
std::string encode(const ServerMessage& m);
Result<ServerMessage, SchemaError> decode_server(std::string_view text);

/// Builds the canonical frame text around an already-serialized payload, so a
/// snapshot broadcast to many sessions is serialized once.
std::string frame(std::string_view kind, std::uint64_t seq, std::string_view payload_text);

}  // namespace rescue::protocol
