#include <gtest/gtest.h>

#include <atomic>
#include <memory>
#include <thread>

#include "rescue/engine.hpp"
#include "rescue/gateway.hpp"
#include "rescue/protocol.hpp"
#include "rescue/runner.hpp"
#include "rescue/ws_server.hpp"

#include "ws_client.hpp"

using namespace rescue;
using namespace rescue::protocol;

namespace {

ServerMessage decode_ok(const std::string& text) {
    auto m = decode_server(text);
    EXPECT_TRUE(m.ok()) << text;
    return m.value();
}

}  // namespace

TEST(WsServer, HandshakeCommandAndBroadcast) {
    CommandQueue queue;
    Gateway gateway(queue, {1, 2});
    WsServer server(gateway, "127.0.0.1", 0);
    server.start();
    ASSERT_NE(server.port(), 0);

    auto client = std::make_unique<rescue::testing::WsClient>("127.0.0.1", server.port());
    client->send(encode(ClientMessage{1, Hello{"operator", 1}}));
    const ServerMessage welcome = decode_ok(client->read());
    EXPECT_EQ(welcome.seq, 1u);
    EXPECT_EQ(std::get<Welcome>(welcome.body).role, "operator");

    client->send(encode(ClientMessage{2, CommandRequest{{2}, Pause{}}}));
    const ServerMessage ack = decode_ok(client->read());
    EXPECT_EQ(std::get<Ack>(ack.body).ref_seq, 2u);
    EXPECT_EQ(queue.drain(0).size(), 1u);

    client->send("{}");
    EXPECT_EQ(std::get<Reject>(decode_ok(client->read()).body).path, "/kind");

    WorldSnapshot s;
    s.tick = 12;
    gateway.publish_snapshot(s);
    const ServerMessage snap = decode_ok(client->read());
    EXPECT_EQ(std::get<WorldSnapshot>(snap.body).tick, 12u);
    EXPECT_EQ(snap.seq, 4u);
    client.reset();
    server.stop();
}

TEST(WsServer, RunnerStreamsSnapshots) {
    SimConfig c = default_config();
    Engine engine(c);
    CommandQueue queue;
    Gateway gateway(queue, {1, 2, 3, 4});
    WsServer server(gateway, "127.0.0.1", 0);
    server.start();

    auto client = std::make_unique<rescue::testing::WsClient>("127.0.0.1", server.port());
    client->send(encode(ClientMessage{1, Hello{"operator", 1}}));
    ASSERT_TRUE(std::holds_alternative<Welcome>(decode_ok(client->read()).body));
    client->send(encode(ClientMessage{2, CommandRequest{{1}, AppendWaypoint{{505, 500, 10}}}}));

    std::atomic<bool> stop{false};
    RealtimeRunner runner(engine, queue, &gateway);
    RunnerStats stats;
    std::thread t([&] { stats = runner.run(stop, 60); });

    int snapshots = 0;
    bool acked = false;
    bool command_event = false;
    std::uint64_t last_tick = 0;
    while (last_tick < 60) {
        const ServerMessage m = decode_ok(client->read());
        if (std::holds_alternative<Ack>(m.body)) acked = true;
        if (const auto* e = std::get_if<EventRecord>(&m.body); e && e->kind == "command") command_event = true;
        if (const auto* s = std::get_if<WorldSnapshot>(&m.body)) {
            ++snapshots;
            EXPECT_GT(s->tick, last_tick);
            last_tick = s->tick;
        }
    }
    t.join();
    client.reset();
    server.stop();
    EXPECT_TRUE(acked);
    EXPECT_TRUE(command_event);
    EXPECT_GE(snapshots, 10);
    EXPECT_EQ(stats.ticks, 60u);
    EXPECT_EQ(stats.snapshots, 20u);
}
