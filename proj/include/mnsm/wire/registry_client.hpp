// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <deque>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "mnsm/wire/registry.hpp"
#include "mnsm/wire/session.hpp"

namespace mnsm::wire {

class RegistryUnreachable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Client side of the name service. Keeps one session to the registry and,
/// once something was registered, reconnects in the background and
/// re-registers after the registry restarts.
class RegistryClient {
 public:
  RegistryClient(Endpoint registry, std::string self,
                 Duration liveness_interval = Duration(1000),
                 Duration request_timeout = Duration(2000));
  ~RegistryClient();
  RegistryClient(const RegistryClient&) = delete;
  RegistryClient& operator=(const RegistryClient&) = delete;

  /// Registers `self` and returns the new generation. Throws
  /// RegistryUnreachable, or std::invalid_argument for a malformed name.
  std::uint64_t register_service(ServiceKind kind, Endpoint address);

  /// nullopt is not-found. Throws RegistryUnreachable.
  std::optional<ServiceRecord> lookup(const std::string& name);
  std::vector<ServiceRecord> list(std::optional<ServiceKind> kind = std::nullopt);

  /// Drops the registration by closing the session politely.
  void deregister();

  bool connected() const;
  /// Generation last granted to our registration (0 if none).
  std::uint64_t generation() const;
  /// Number of successful background re-registrations.
  std::uint64_t reregistrations() const;

 private:
  struct Registration {
    ServiceKind kind;
    Endpoint address;
  };

  WireMessage request(WireMessage msg);
  std::shared_ptr<Session> ensure_session(std::unique_lock<std::mutex>& lock);
  void on_close(const std::shared_ptr<Session>& which);
  void reconnect_loop();

  Endpoint registry_;
  std::string self_;
  Duration interval_;
  Duration timeout_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::shared_ptr<Session> session_;
  std::deque<std::shared_ptr<std::promise<WireMessage>>> pending_;
  std::optional<Registration> registration_;
  std::uint64_t generation_ = 0;
  std::uint64_t reregistrations_ = 0;
  bool stopping_ = false;
  std::thread reconnector_;
};

}  // namespace mnsm::wire
