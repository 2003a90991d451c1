#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "egonet/protocol.hpp"

namespace egonet {

inline constexpr std::uint16_t kDefaultPort = 8765;
inline constexpr const char* kPortEnv = "EGONET_PORT";

/// Port from EGONET_PORT, else kDefaultPort. Throws ParameterError when the
/// variable is set but is not a port number.
std::uint16_t default_port();

struct ServerConfig {
  std::string host = "127.0.0.1";
  // 0 picks a free port; see Server::port().
  std::uint16_t port = kDefaultPort;
  std::string log_dir = ".";
  double tick_hz = 60.0;
};

/// Line-delimited JSON over TCP around one authoritative ProtocolSession.
/// The session clock starts at listen(). Clients may disconnect and attach
/// again; a "hello" returns the current state. Replies go to the sender,
/// tick updates to every attached client. The log is written when the pass
/// ends and again on stop.
class Server {
 public:
  Server(const Scene& scene, TaskSet tasks, ViewCondition condition, ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds, listens and starts the session. Throws Error when the socket cannot be opened.
  void listen();
  std::uint16_t port() const { return port_; }
  // Serves until stop(); call stop() from any thread or a signal handler.
  void run();
  void stop() { stopping_ = true; }

  std::size_t connections() const { return connections_; }
  const std::string& log_path() const { return log_path_; }

 private:
  double now() const;
  void serve_connection(int fd);
  void broadcast(const std::vector<Message>& msgs);
  void write_log();

  const Scene& scene_;
  ServerConfig config_;
  ProtocolSession session_;
  std::chrono::steady_clock::time_point t0_;
  std::string log_path_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::atomic<std::size_t> connections_{0};

  std::mutex mutex_;  // guards session_, clients_ and socket writes
  std::map<int, bool> clients_;
  bool finish_logged_ = false;
  std::vector<std::thread> threads_;
};

}  // namespace egonet
