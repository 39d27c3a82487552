#pragma once

// TCP transport for line-framed sessions: a thread-per-connection server and a
// blocking client.

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "signalbench/controller.hpp"
#include "signalbench/env.hpp"

namespace signalbench {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

/// "host:port" or ":port". Throws ConfigError.
Endpoint parse_endpoint(const std::string& text);

/// Environment session: hello, then reset / step / mask / close.
class EnvSession final : public LineSession {
 public:
  using ControllerFactory = std::function<std::unique_ptr<SignalController>()>;

  explicit EnvSession(EnvConfig cfg, ControllerFactory controllers = {});

  std::string handle(std::string_view frame) override;
  bool finished() const override { return finished_; }

 private:
  std::string fail(std::int64_t seq, const std::string& message);

  std::string hash_;
  Environment env_;
  bool greeted_ = false;
  bool finished_ = false;
  std::int64_t last_seq_ = -1;
};

using SessionFactory = std::function<std::unique_ptr<LineSession>()>;

class LineServer {
 public:
  static constexpr std::size_t kMaxFrame = 1 << 20;

  explicit LineServer(SessionFactory factory);
  ~LineServer();
  LineServer(const LineServer&) = delete;
  LineServer& operator=(const LineServer&) = delete;

  /// Throws std::runtime_error("bind ...") if the address cannot be bound.
  void bind(const Endpoint& at);
  std::uint16_t port() const { return port_; }

  /// Accepts connections until stop(); each connection gets its own session and thread.
  void run();
  /// Starts run() on a background thread.
  void start();
  void stop();

 private:
  void serve_connection(int fd);

  SessionFactory factory_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex mu_;
  std::vector<int> client_fds_;
  std::vector<std::thread> workers_;
};

/// Blocking line client. Throws std::runtime_error on connection loss.
class TcpTransport final : public Transport {
 public:
  explicit TcpTransport(const Endpoint& to);
  ~TcpTransport() override;
  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;

  std::string exchange(const std::string& frame) override;
  void send_raw(std::string_view bytes);
  /// Next line including its '\n'; empty string on orderly close.
  std::string read_line();

 private:
  int fd_ = -1;
  std::string buffer_;
};

}  // namespace signalbench
