#include "wcps/gateway/server.hpp"

#include <iostream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "wcps/errors.hpp"
#include "wcps/gateway/wire.hpp"

namespace wcps {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, LiveSession& live)
      : ws_(std::move(socket)), live_(live) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->on_accept();
    });
  }

 private:
  void on_accept() {
    box_ = live_.subscribe();
    std::weak_ptr<WsSession> weak = shared_from_this();
    auto exec = ws_.get_executor();
    box_->set_notifier([weak, exec] {
      net::post(exec, [weak] {
        if (auto self = weak.lock()) self->write_next();
      });
    });
    // the current snapshot first, so a client never starts empty-handed
    box_->push({true, live_.state().dump()});
    read_next();
  }

  void read_next() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->close();
        return;
      }
      self->on_message(beast::buffers_to_string(self->buffer_.data()));
      self->buffer_.consume(self->buffer_.size());
      self->read_next();
    });
  }

  void on_message(const std::string& text) {
    const auto msg = wire::parse_client_message(text);
    switch (msg.status) {
      case wire::ClientMessage::Status::ignored:
        std::cerr << "wcps: " << msg.message << '\n';
        return;
      case wire::ClientMessage::Status::error:
        box_->push({false, wire::encode_error(msg.message).dump()});
        return;
      case wire::ClientMessage::Status::command:
        try {
          live_.submit(msg.command);
        } catch (const Error& e) {
          box_->push({false, wire::encode_error(e.what()).dump()});
        }
        return;
    }
  }

  void write_next() {
    if (writing_ || !box_) return;
    auto frame = box_->try_pop();
    if (!frame) return;
    writing_ = true;
    out_ = std::move(frame->text);
    ws_.text(true);
    ws_.async_write(net::buffer(out_), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->writing_ = false;
      if (ec) {
        self->close();
        return;
      }
      self->write_next();
    });
  }

  void close() {
    if (box_) {
      live_.unsubscribe(box_);
      box_.reset();
    }
  }

  websocket::stream<beast::tcp_stream> ws_;
  LiveSession& live_;
  beast::flat_buffer buffer_;
  std::shared_ptr<Outbox> box_;
  std::string out_;
  bool writing_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, LiveSession& live) : stream_(std::move(socket)), live_(live) {}

  void run() { read_next(); }

 private:
  void read_next() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->on_request();
    });
  }

  void on_request() {
    if (websocket::is_upgrade(req_)) {
      if (req_.target() == "/ws") {
        stream_.expires_never();
        std::make_shared<WsSession>(stream_.release_socket(), live_)->run(std::move(req_));
        return;
      }
      reply(http::status::not_found, R"({"type":"error","message":"no websocket here"})");
      return;
    }
    if (req_.method() != http::verb::get) {
      reply(http::status::method_not_allowed, R"({"type":"error","message":"GET only"})");
    } else if (req_.target() == "/modes") {
      reply(http::status::ok, live_.modes().dump());
    } else if (req_.target() == "/state") {
      reply(http::status::ok, live_.state().dump());
    } else {
      reply(http::status::not_found, R"({"type":"error","message":"not found"})");
    }
  }

  void reply(http::status status, std::string body) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::content_type, "application/json");
    res->set(http::field::access_control_allow_origin, "*");
    res->keep_alive(req_.keep_alive());
    res->body() = std::move(body);
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (res->need_eof()) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      self->read_next();
    });
  }

  beast::tcp_stream stream_;
  LiveSession& live_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

struct Server::Impl {
  Impl(LiveSession& live, std::uint16_t port, std::string address)
      : live(live), port(port), address(std::move(address)), acceptor(ioc) {}

  void accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        if (ec == net::error::operation_aborted) return;
      } else {
        std::make_shared<HttpSession>(std::move(socket), live)->run();
      }
      accept();
    });
  }

  LiveSession& live;
  std::uint16_t port;
  std::string address;
  net::io_context ioc{1};
  tcp::acceptor acceptor;
  std::thread thread;
};

Server::Server(LiveSession& session, std::uint16_t port, std::string address)
    : impl_(std::make_unique<Impl>(session, port, std::move(address))) {}

Server::~Server() { stop(); }

void Server::start() {
  beast::error_code ec;
  const tcp::endpoint ep{net::ip::make_address(impl_->address, ec), impl_->port};
  if (ec) throw IoError("bad listen address '" + impl_->address + "'");
  impl_->acceptor.open(ep.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(ep, ec);
  if (!ec) impl_->acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) throw IoError("cannot listen on port " + std::to_string(impl_->port) + ": " + ec.message());
  impl_->port = impl_->acceptor.local_endpoint().port();
  impl_->accept();
  impl_->thread = std::thread([this] { impl_->ioc.run(); });
}

void Server::stop() {
  if (!impl_) return;
  impl_->ioc.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::uint16_t Server::port() const { return impl_->port; }

}  // namespace wcps
