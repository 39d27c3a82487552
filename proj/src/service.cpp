#include "signalbench/service.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <stdexcept>

#include "signalbench/errors.hpp"

namespace signalbench {

using namespace wire;

namespace {

bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

sockaddr_in resolve(const Endpoint& e) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(e.port);
  const std::string host = e.host.empty() || e.host == "localhost" ? "127.0.0.1" : e.host;
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || !res)
      throw std::runtime_error("cannot resolve host '" + host + "'");
    addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
    ::freeaddrinfo(res);
  }
  return addr;
}

}  // namespace

Endpoint parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw ConfigError("address '" + text + "': expected host:port");
  Endpoint e;
  if (colon > 0) e.host = text.substr(0, colon);
  const std::string port = text.substr(colon + 1);
  try {
    std::size_t used = 0;
    const int p = std::stoi(port, &used);
    if (used != port.size() || p < 0 || p > 65535) throw std::out_of_range("port");
    e.port = static_cast<std::uint16_t>(p);
  } catch (const std::exception&) {
    throw ConfigError("address '" + text + "': invalid port");
  }
  return e;
}

EnvSession::EnvSession(EnvConfig cfg, ControllerFactory controllers)
    : hash_(config_hash(cfg)), env_(std::move(cfg), controllers ? controllers() : nullptr) {}

std::string EnvSession::fail(std::int64_t seq, const std::string& message) {
  finished_ = true;
  return encode(ErrorResponse{seq, message});
}

std::string EnvSession::handle(std::string_view frame) {
  if (finished_) return encode(ErrorResponse{0, "session closed"});
  Message msg;
  try {
    msg = decode(frame);
  } catch (const ProtocolError& e) {
    return fail(0, e.what());
  }
  if (auto* h = std::get_if<Hello>(&msg)) {
    if (greeted_) return fail(0, "duplicate hello");
    if (h->protocol_version != kProtocolVersion) return fail(0, "unsupported protocol_version");
    if (!h->config_hash.empty() && h->config_hash != hash_) return fail(0, "config_hash mismatch");
    greeted_ = true;
    HelloAck ack;
    ack.session = h->session;
    ack.config_hash = hash_;
    ack.obs_dim = static_cast<int>(env_.obs_dim());
    ack.action_count = kNumActions;
    return encode(ack);
  }
  if (!greeted_) return fail(0, "hello required first");
  std::int64_t seq = 0;
  try {
    auto check_seq = [&](std::int64_t s) {
      seq = s;
      if (s <= last_seq_) throw ProtocolError("seq must increase (got " + std::to_string(s) + ")");
      last_seq_ = s;
    };
    if (auto* r = std::get_if<ResetRequest>(&msg)) {
      check_seq(r->seq);
      ObsResponse out;
      out.seq = r->seq;
      out.obs = env_.reset(r->seed);
      out.info.t = env_.t();
      out.info.current_phase = env_.controller().active_phase();
      out.info.in_transition = env_.controller().in_transition();
      out.info.raw = env_.raw_observation();
      return encode(out);
    }
    if (auto* r = std::get_if<StepRequest>(&msg)) {
      check_seq(r->seq);
      StepResult res = env_.step(r->action);
      return encode(ObsResponse{r->seq, std::move(res.obs), res.reward, res.done, std::move(res.info)});
    }
    if (auto* r = std::get_if<MaskRequest>(&msg)) {
      check_seq(r->seq);
      if (!env_.active()) throw UsageError("no active episode");
      return encode(MaskResponse{r->seq, env_.action_mask()});
    }
    if (auto* r = std::get_if<CloseRequest>(&msg)) {
      check_seq(r->seq);
      finished_ = true;
      return encode(Bye{r->seq});
    }
  } catch (const std::exception& e) {
    return fail(seq, e.what());
  }
  return fail(0, "unexpected message '" + std::string(type_name(msg)) + "'");
}

LineServer::LineServer(SessionFactory factory) : factory_(std::move(factory)) {}

LineServer::~LineServer() { stop(); }

void LineServer::bind(const Endpoint& at) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr = resolve(at);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listen_fd_, 64) != 0) {
    const std::string err = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw std::runtime_error("bind " + at.host + ":" + std::to_string(at.port) + ": " + err);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

void LineServer::run() {
  if (listen_fd_ < 0) throw std::logic_error("LineServer::run before bind");
  while (!stopping_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;  // listening socket shut down
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    std::lock_guard lock(mu_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    client_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void LineServer::start() {
  acceptor_ = std::thread([this] { run(); });
}

void LineServer::stop() {
  if (stopping_.exchange(true)) return;
  if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& w : workers) w.join();
  if (listen_fd_ >= 0) ::close(listen_fd_);
  listen_fd_ = -1;
}

void LineServer::serve_connection(int fd) {
  std::unique_ptr<LineSession> session;
  try {
    session = factory_();
  } catch (const std::exception& e) {
    write_all(fd, encode(ErrorResponse{0, e.what()}));
  }
  std::string buf;
  char chunk[4096];
  bool open = session != nullptr;
  while (open) {
    const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buf.append(chunk, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (std::size_t nl; open && (nl = buf.find('\n', start)) != std::string::npos; start = nl + 1) {
      std::string reply;
      try {
        reply = session->handle(std::string_view(buf).substr(start, nl - start + 1));
      } catch (const std::exception& e) {
        write_all(fd, encode(ErrorResponse{0, std::string("internal error: ") + e.what()}));
        open = false;
        break;
      }
      if (!write_all(fd, reply) || session->finished()) open = false;
    }
    buf.erase(0, start);
    if (open && buf.size() > kMaxFrame) {
      write_all(fd, encode(ErrorResponse{0, "frame exceeds 1 MiB"}));
      open = false;
    }
  }
  {
    std::lock_guard lock(mu_);
    client_fds_.erase(std::remove(client_fds_.begin(), client_fds_.end(), fd), client_fds_.end());
  }
  ::shutdown(fd, SHUT_RDWR);
  ::close(fd);
}

TcpTransport::TcpTransport(const Endpoint& to) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
  sockaddr_in addr = resolve(to);
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd_);
    fd_ = -1;
    throw std::runtime_error("connect " + to.host + ":" + std::to_string(to.port) + ": " + err);
  }
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

TcpTransport::~TcpTransport() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpTransport::send_raw(std::string_view bytes) {
  if (!write_all(fd_, bytes)) throw std::runtime_error("connection lost while sending");
}

std::string TcpTransport::read_line() {
  char chunk[4096];
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl + 1);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return {};
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::string TcpTransport::exchange(const std::string& frame) {
  send_raw(frame);
  std::string line = read_line();
  if (line.empty()) throw std::runtime_error("connection closed by peer");
  return line;
}

}  // namespace signalbench
