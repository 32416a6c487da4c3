#include "rescue/ws_server.hpp"

#include <chrono>
#include <deque>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace rescue {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

double wall_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

class WsSession : public std::enable_shared_from_this<WsSession> {
public:
    WsSession(tcp::socket socket, Gateway& gateway) : ws_(std::move(socket)), gateway_(gateway) {}

    void start() {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.text(true);
        ws_.async_accept(beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) return;
        std::weak_ptr<WsSession> weak = shared_from_this();
        auto executor = ws_.get_executor();
        id_ = gateway_.connect([weak, executor] {
            asio::post(executor, [weak] {
                if (auto self = weak.lock()) self->flush();
            });
        });
        connected_ = true;
        read();
    }

    void read() { ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this())); }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) return close();
        const std::string text = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        gateway_.receive(id_, text, wall_seconds());
        read();
    }

    void flush() {
        if (!connected_) return;
        for (std::string& f : gateway_.drain(id_)) outgoing_.push_back(std::move(f));
        write_next();
    }

    void write_next() {
        if (writing_ || outgoing_.empty()) return;
        writing_ = true;
        ws_.async_write(asio::buffer(outgoing_.front()),
                        beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
        writing_ = false;
        if (ec) return close();
        outgoing_.pop_front();
        write_next();
    }

    void close() {
        if (!connected_) return;
        connected_ = false;
        gateway_.disconnect(id_);
    }

    websocket::stream<beast::tcp_stream> ws_;
    Gateway& gateway_;
    beast::flat_buffer buffer_;
    std::deque<std::string> outgoing_;
    SessionId id_ = 0;
    bool connected_ = false;
    bool writing_ = false;
};

}  // namespace

struct WsServer::Impl {
    Impl(Gateway& gw, const std::string& bind, std::uint16_t port)
        : gateway(gw), acceptor(ioc, tcp::endpoint(asio::ip::make_address(bind), port)) {}

    void accept() {
        acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
            if (ec) return;
            std::make_shared<WsSession>(std::move(socket), gateway)->start();
            accept();
        });
    }

    Gateway& gateway;
    asio::io_context ioc{1};
    tcp::acceptor acceptor;
    std::thread thread;
};

WsServer::WsServer(Gateway& gateway, const std::string& bind_address, std::uint16_t port)
    : impl_(std::make_unique<Impl>(gateway, bind_address, port)) {}

WsServer::~WsServer() { stop(); }

void WsServer::start() {
    impl_->accept();
    impl_->thread = std::thread([this] { impl_->ioc.run(); });
}

void WsServer::stop() {
    if (!impl_->thread.joinable()) return;
    impl_->ioc.stop();
    impl_->thread.join();
}

std::uint16_t WsServer::port() const { return impl_->acceptor.local_endpoint().port(); }

}  // namespace rescue
