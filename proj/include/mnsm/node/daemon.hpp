// SPDX-License-Identifier: Apache-2.0
//
// The node daemon service: registry registration, the manager session with
// reconnect, the managed child, and the single trigger queue that
// serialises everything into DaemonCore.

#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <variant>

#include "mnsm/machine/spec.hpp"
#include "mnsm/node/daemon_core.hpp"
#include "mnsm/node/log_file.hpp"
#include "mnsm/node/managed_process.hpp"
#include "mnsm/wire/registry_client.hpp"
#include "mnsm/wire/session.hpp"

namespace mnsm::node {

struct DaemonOptions {
  std::string name;
  std::string manager = "manager";
  wire::Endpoint registry;
  std::filesystem::path log_dir = ".";
  std::string exec;
  std::shared_ptr<const machine::MachineSpec> spec;
  std::string host = "127.0.0.1";
  wire::Duration liveness{1000};
  Duration kill_grace = kDefaultKillGrace;
  wire::Duration max_backoff{2000};
};

class Daemon {
 public:
  explicit Daemon(DaemonOptions options);
  ~Daemon();
  Daemon(const Daemon&) = delete;
  Daemon& operator=(const Daemon&) = delete;

  /// Runs the trigger loop until stop() or a shutdown action.
  void run();
  /// Thread-safe; run() returns soon after.
  void stop();

  std::string state() const;
  bool connected() const;
  std::uint64_t sessions_opened() const { return sessions_opened_; }
  std::uint64_t state_resends() const { return resends_; }
  std::optional<pid_t> child_pid() const { return process_.pid(); }
  const std::filesystem::path& log_path() const { return log_->path(); }

 private:
  struct Command {
    std::string name;
    std::uint64_t session;
  };
  struct ChildEvent {
    std::uint64_t generation;
    std::string name;
  };
  struct ChildExit {
    std::uint64_t generation;
    int code;
  };
  struct SessionUp {
    std::uint64_t session;
  };
  struct SessionLost {
    std::uint64_t session;
  };
  struct Stop {};
  using Item = std::variant<Command, ChildEvent, ChildExit, SessionUp, SessionLost, Stop>;

  void post(Item item);
  void connector_loop();
  void on_session_message(std::uint64_t session, const wire::WireMessage& msg);
  void apply(const machine::Trigger& trigger);
  void send_report(const StateReport& report);
  void note(const std::string& line);

  DaemonOptions options_;
  std::shared_ptr<LogFile> log_;
  DaemonCore core_;
  ManagedProcess process_;
  wire::RegistryClient registry_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Item> queue_;
  std::shared_ptr<wire::Session> session_;
  std::uint64_t session_id_ = 0;
  std::string state_;
  bool stopping_ = false;

  std::uint64_t child_generation_ = 0;  // trigger-loop thread only
  std::atomic<std::uint64_t> sessions_opened_{0};
  std::atomic<std::uint64_t> resends_{0};
  std::thread connector_;
};

}  // namespace mnsm::node
