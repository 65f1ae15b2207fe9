// SPDX-License-Identifier: Apache-2.0
//
// Ordered, heartbeat-supervised message session over TCP. Each session owns
// one I/O thread; handlers run on that thread, one message at a time.

#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "mnsm/wire/liveness.hpp"
#include "mnsm/wire/socket.hpp"

namespace mnsm::wire {

enum class CloseReason { local, peer_bye, peer_eof, dead, io_error };

std::string_view to_string(CloseReason reason);

struct SessionOptions {
  std::string self;
  Duration liveness_interval{1000};
  int grace_factor = 3;
};

class Session : public std::enable_shared_from_this<Session> {
 public:
  using MessageHandler = std::function<void(const WireMessage&)>;
  using CloseHandler = std::function<void(CloseReason)>;

  /// Connects to `peer`. Throws ConnectError.
  static std::shared_ptr<Session> open(const Endpoint& peer, SessionOptions options,
                                       Duration connect_timeout = Duration(2000));
  /// Wraps an accepted connection.
  static std::shared_ptr<Session> adopt(Socket socket, SessionOptions options);

  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  /// Starts the I/O thread. The close handler fires exactly once.
  void start(MessageHandler on_message, CloseHandler on_close);

  /// Thread-safe. False once the session is closed or dead.
  bool send(WireMessage msg);

  /// Sends BYE and stops the I/O thread. Idempotent; callable from handlers.
  void close();

  /// Stops without a BYE, as if the process vanished. The peer sees EOF.
  void abort();

  bool closed() const { return stopping_.load(); }
  std::uint64_t seq_gaps() const;

 private:
  Session(Socket socket, SessionOptions options);
  void run();
  void finish(CloseReason reason);

  Socket socket_;
  SessionOptions options_;
  int wake_[2] = {-1, -1};
  mutable std::mutex mu_;
  SessionProtocol protocol_;
  MessageHandler on_message_;
  CloseHandler on_close_;
  std::atomic<bool> stopping_{false};
  std::atomic<bool> finished_{false};
  std::thread io_;
};

/// Accept loop on its own thread.
class Listener {
 public:
  using AcceptHandler = std::function<void(Socket)>;

  Listener(const std::string& host, int port, AcceptHandler on_accept);
  ~Listener();
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;

  int port() const { return port_; }
  void stop();

 private:
  void run();

  int port_ = 0;  // written by listen_tcp during socket_'s initialisation
  Socket socket_;
  int wake_[2] = {-1, -1};
  AcceptHandler on_accept_;
  std::atomic<bool> stopping_{false};
  std::thread thread_;
};

}  // namespace mnsm::wire
