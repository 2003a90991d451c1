#include "egonet/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <filesystem>

#include "egonet/errors.hpp"

namespace egonet {

namespace {

bool send_all(int fd, const std::string& data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

bool send_messages(int fd, const std::vector<Message>& msgs) {
  std::string buf;
  for (const Message& m : msgs) {
    buf += encode(m);
    buf += '\n';
  }
  return buf.empty() || send_all(fd, buf);
}

std::string sys_error(const std::string& what) { return what + ": " + std::strerror(errno); }

}  // namespace

std::uint16_t default_port() {
  const char* env = std::getenv(kPortEnv);
  if (!env || !*env) return kDefaultPort;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 65535) {
    throw ParameterError(std::string(kPortEnv) + " must be a port number in 1..65535, got '" + env + "'");
  }
  return static_cast<std::uint16_t>(v);
}

Server::Server(const Scene& scene, TaskSet tasks, ViewCondition condition, ServerConfig config)
    : scene_(scene),
      config_(std::move(config)),
      session_(scene, (validate_tasks(scene.graph(), tasks), std::move(tasks)), condition,
               {0, condition, "scene", PassRole::Measured}, true) {
  if (!(config_.tick_hz > 0.0)) throw ParameterError("tick rate must be positive");
}

Server::~Server() {
  stop();
  for (std::thread& t : threads_) {
    if (t.joinable()) t.join();
  }
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

double Server::now() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

void Server::listen() {
  std::error_code ec;
  std::filesystem::create_directories(config_.log_dir, ec);
  if (ec) throw Error("cannot create log directory " + config_.log_dir + ": " + ec.message());

  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(sys_error("socket"));
  const int yes = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(config_.port);
  if (::inet_pton(AF_INET, config_.host.c_str(), &addr.sin_addr) != 1) {
    throw ParameterError("bad listen address '" + config_.host + "'");
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    throw Error(sys_error("bind " + config_.host + ":" + std::to_string(config_.port)));
  }
  if (::listen(listen_fd_, 8) < 0) throw Error(sys_error("listen"));
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);

  std::string stamp;
  for (char c : wall_clock_now()) stamp += (c == ':' ? '-' : c);
  log_path_ = (std::filesystem::path(config_.log_dir) / ("session-" + stamp + ".ndjson")).string();
  t0_ = std::chrono::steady_clock::now();
  std::lock_guard lock(mutex_);
  session_.start(0.0);
}

void Server::broadcast(const std::vector<Message>& msgs) {
  if (msgs.empty()) return;
  for (auto& [fd, alive] : clients_) {
    if (alive) alive = send_messages(fd, msgs);
  }
}

void Server::write_log() {
  try {
    session_.log().write(log_path_);
  } catch (const Error&) {
    // The log stays in memory and is retried on the next write.
  }
}

void Server::run() {
  if (listen_fd_ < 0) listen();
  const auto tick_period = std::chrono::duration<double>(1.0 / config_.tick_hz);
  auto next_tick = std::chrono::steady_clock::now();
  while (!stopping_) {
    const auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(next_tick - std::chrono::steady_clock::now());
    pollfd pfd{listen_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(std::max<long>(0, wait.count())));
    if (ready < 0 && errno != EINTR) throw Error(sys_error("poll"));
    if (ready > 0) {
      const int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd >= 0) {
        ++connections_;
        {
          std::lock_guard lock(mutex_);
          clients_[fd] = true;
        }
        threads_.emplace_back([this, fd] { serve_connection(fd); });
      }
    }
    if (std::chrono::steady_clock::now() >= next_tick) {
      next_tick += std::chrono::duration_cast<std::chrono::steady_clock::duration>(tick_period);
      std::lock_guard lock(mutex_);
      broadcast(session_.tick(now()));
      if (session_.finished() && !finish_logged_) {
        write_log();
        finish_logged_ = true;
      }
    }
  }
  for (std::thread& t : threads_) {
    if (t.joinable()) t.join();
  }
  threads_.clear();
  std::lock_guard lock(mutex_);
  session_.close(now());
  write_log();
}

void Server::serve_connection(int fd) {
  std::string pending;
  char buf[4096];
  bool alive = true;
  while (alive && !stopping_) {
    pollfd pfd{fd, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, 100);
    if (ready < 0 && errno != EINTR) break;
    if (ready <= 0) continue;
    const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
    if (n <= 0) break;
    pending.append(buf, static_cast<std::size_t>(n));
    std::size_t nl;
    while (alive && (nl = pending.find('\n')) != std::string::npos) {
      const std::string line = pending.substr(0, nl);
      pending.erase(0, nl + 1);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::lock_guard lock(mutex_);
      try {
        alive = send_messages(fd, session_.handle(decode(line), now()));
      } catch (const ProtocolError& e) {
        alive = send_messages(fd, {server_message(ErrorMsg{e.what(), std::nullopt}, 0, now())});
      }
    }
  }
  std::lock_guard lock(mutex_);
  clients_.erase(fd);
  ::close(fd);
}

}  // namespace egonet
