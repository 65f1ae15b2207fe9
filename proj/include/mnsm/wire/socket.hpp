// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mnsm/wire/liveness.hpp"

namespace mnsm::wire {

struct Endpoint {
  std::string host = "127.0.0.1";
  int port = 0;

  /// Parses "host:port". Throws std::invalid_argument.
  static Endpoint parse(std::string_view text);
  std::string str() const { return host + ":" + std::to_string(port); }
  bool operator==(const Endpoint&) const = default;
};

inline constexpr int kDefaultRegistryPort = 7900;

/// Registry address for all components: MNSM_REGISTRY (host:port) wins over
/// an explicit flag, which wins over 127.0.0.1:7900.
Endpoint registry_endpoint(std::optional<std::string> flag = std::nullopt);

class ConnectError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Owning file descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(other.release()) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release() {
    int fd = fd_;
    fd_ = -1;
    return fd;
  }
  void close();
  void shutdown();

 private:
  int fd_ = -1;
};

/// Writes all of `data`; false on error or peer close.
bool write_all(int fd, std::string_view data);

Socket connect_tcp(const Endpoint& ep, Duration timeout);

/// Binds and listens. Port 0 picks an ephemeral port, reported via *bound.
Socket listen_tcp(const std::string& host, int port, int* bound = nullptr);

}  // namespace mnsm::wire
