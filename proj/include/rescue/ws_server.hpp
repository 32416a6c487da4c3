#pragma once

// WebSocket transport for the gateway: one text frame per protocol message.

#include <cstdint>
#include <memory>
#include <string>

#include "rescue/gateway.hpp"

namespace rescue {

class WsServer {
public:
    /// Port 0 picks an ephemeral port; see port().
    WsServer(Gateway& gateway, const std::string& bind_address, std::uint16_t port);
    ~WsServer();

    WsServer(const WsServer&) = delete;
    WsServer& operator=(const WsServer&) = delete;

    /// Starts accepting on a background I/O thread.
    void start();
    void stop();

    [[nodiscard]] std::uint16_t port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace rescue
