// SPDX-License-Identifier: Apache-2.0

#include "mnsm/wire/session.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <iostream>

namespace mnsm::wire {
namespace {

constexpr std::size_t kMaxLine = 1 << 20;

void make_wake_pipe(int (&fds)[2]) {
  if (::pipe2(fds, O_CLOEXEC | O_NONBLOCK) != 0) {
    throw std::runtime_error("pipe2 failed");
  }
}

void close_pipe(int (&fds)[2]) {
  for (int& fd : fds) {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
}

void wake(int fd) {
  char c = 1;
  [[maybe_unused]] auto n = ::write(fd, &c, 1);
}

}  // namespace

std::string_view to_string(CloseReason reason) {
  switch (reason) {
    case CloseReason::local: return "local";
    case CloseReason::peer_bye: return "peer-bye";
    case CloseReason::peer_eof: return "peer-eof";
    case CloseReason::dead: return "session-dead";
    case CloseReason::io_error: return "io-error";
  }
  return "io-error";
}

Session::Session(Socket socket, SessionOptions options)
    : socket_(std::move(socket)),
      options_(std::move(options)),
      protocol_(options_.self, options_.liveness_interval,
                [this](const std::string& line) { return write_all(socket_.fd(), line); },
                options_.grace_factor) {
  make_wake_pipe(wake_);
}

std::shared_ptr<Session> Session::open(const Endpoint& peer, SessionOptions options,
                                       Duration connect_timeout) {
  auto sock = connect_tcp(peer, connect_timeout);
  return std::shared_ptr<Session>(new Session(std::move(sock), std::move(options)));
}

std::shared_ptr<Session> Session::adopt(Socket socket, SessionOptions options) {
  timeval tv{5, 0};
  setsockopt(socket.fd(), SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
  return std::shared_ptr<Session>(new Session(std::move(socket), std::move(options)));
}

Session::~Session() {
  stopping_ = true;
  if (wake_[1] >= 0) wake(wake_[1]);
  if (io_.joinable()) {
    if (io_.get_id() == std::this_thread::get_id()) {
      io_.detach();
    } else {
      io_.join();
    }
  }
  close_pipe(wake_);
}

void Session::start(MessageHandler on_message, CloseHandler on_close) {
  on_message_ = std::move(on_message);
  on_close_ = std::move(on_close);
  {
    std::lock_guard lock(mu_);
    protocol_.start(now_ms());
  }
  io_ = std::thread([self = shared_from_this()] { self->run(); });
}

bool Session::send(WireMessage msg) {
  if (stopping_) return false;
  std::lock_guard lock(mu_);
  return protocol_.send(std::move(msg), now_ms());
}

std::uint64_t Session::seq_gaps() const {
  std::lock_guard lock(mu_);
  return protocol_.seq_gaps();
}

void Session::close() {
  bool was = stopping_.exchange(true);
  if (was) return;
  {
    std::lock_guard lock(mu_);
    protocol_.send(make_bye(options_.self), now_ms());
  }
  wake(wake_[1]);
  if (io_.joinable() && io_.get_id() != std::this_thread::get_id()) io_.join();
}

void Session::abort() {
  if (stopping_.exchange(true)) return;
  socket_.shutdown();
  wake(wake_[1]);
  if (io_.joinable() && io_.get_id() != std::this_thread::get_id()) io_.join();
}

void Session::finish(CloseReason reason) {
  if (finished_.exchange(true)) return;
  socket_.shutdown();
  if (on_close_) on_close_(reason);
}

void Session::run() {
  std::string buffer;
  char chunk[8192];
  CloseReason reason = CloseReason::local;

  while (!stopping_) {
    TimePoint deadline;
    {
      std::lock_guard lock(mu_);
      deadline = protocol_.next_deadline();
    }
    auto wait = std::max<std::int64_t>(0, (deadline - now_ms()).count());
    pollfd fds[2] = {{socket_.fd(), POLLIN, 0}, {wake_[0], POLLIN, 0}};
    int rc = ::poll(fds, 2, static_cast<int>(wait) + 1);
    if (rc < 0 && errno != EINTR) {
      reason = CloseReason::io_error;
      break;
    }
    if (stopping_) break;

    if (rc > 0 && (fds[0].revents & (POLLIN | POLLHUP | POLLERR))) {
      ssize_t n = ::recv(socket_.fd(), chunk, sizeof chunk, 0);
      if (n == 0) {
        reason = CloseReason::peer_eof;
        break;
      }
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        reason = CloseReason::io_error;
        break;
      }
      buffer.append(chunk, static_cast<std::size_t>(n));
      bool bye = false;
      std::size_t start = 0;
      for (auto nl = buffer.find('\n'); nl != std::string::npos;
           nl = buffer.find('\n', start)) {
        std::string_view line(buffer.data() + start, nl - start);
        start = nl + 1;
        std::optional<WireMessage> msg;
        try {
          std::lock_guard lock(mu_);
          msg = protocol_.receive_line(line, now_ms());
        } catch (const DecodeError& e) {
          std::cerr << "[" << options_.self << "] dropped frame: " << e.what() << "\n";
          continue;
        }
        if (!msg) continue;
        if (msg->type == MessageType::BYE) {
          bye = true;
          break;
        }
        if (on_message_) on_message_(*msg);
        if (stopping_) break;
      }
      buffer.erase(0, start);
      if (bye) {
        reason = CloseReason::peer_bye;
        break;
      }
      if (buffer.size() > kMaxLine) {
        reason = CloseReason::io_error;
        break;
      }
    }

    bool dead;
    {
      std::lock_guard lock(mu_);
      dead = protocol_.poll(now_ms());
    }
    if (dead) {
      reason = CloseReason::dead;
      break;
    }
  }
  stopping_ = true;
  finish(reason);
}

Listener::Listener(const std::string& host, int port, AcceptHandler on_accept)
    : socket_(listen_tcp(host, port, &port_)), on_accept_(std::move(on_accept)) {
  make_wake_pipe(wake_);
  thread_ = std::thread([this] { run(); });
}

Listener::~Listener() {
  stop();
  close_pipe(wake_);
}

void Listener::stop() {
  if (stopping_.exchange(true)) return;
  wake(wake_[1]);
  if (thread_.joinable()) thread_.join();
  socket_.close();
}

void Listener::run() {
  while (!stopping_) {
    pollfd fds[2] = {{socket_.fd(), POLLIN, 0}, {wake_[0], POLLIN, 0}};
    if (::poll(fds, 2, -1) < 0) {
      if (errno == EINTR) continue;
      return;
    }
    if (stopping_) return;
    if (fds[0].revents & POLLIN) {
      int fd = ::accept4(socket_.fd(), nullptr, nullptr, SOCK_CLOEXEC);
      if (fd >= 0) on_accept_(Socket(fd));
    }
  }
}

}  // namespace mnsm::wire
