#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "wcps/gateway/live_session.hpp"

namespace wcps {

/// HTTP + websocket front end of a LiveSession: GET /modes, GET /state, /ws.
class Server {
 public:
  /// Port 0 binds an ephemeral port; see port().
  Server(LiveSession& session, std::uint16_t port, std::string address = "0.0.0.0");
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts the I/O thread. Throws IoError if the port is unavailable.
  void start();
  void stop();
  std::uint16_t port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace wcps
