#pragma once

#include <memory>
#include <optional>
#include <string>

namespace dfserve {

struct ServerOptions {
  std::optional<std::string> now;          // ISO timestamp for new sessions
  std::optional<std::string> events_json;  // fixture copied into each new session
  bool wait_when_busy = false;             // otherwise a concurrent turn gets 409
};

// HTTP JSON API v1 over the dataflow C API. One graph context per session.
class Server {
public:
  explicit Server(ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and serves until stop(). False when the port cannot be bound.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it, or -1.
  int bind_any(const std::string& host);
  // Serves on the port bound by bind_any.
  bool serve_bound();
  void wait_until_ready();
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dfserve
