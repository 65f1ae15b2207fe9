// SPDX-License-Identifier: Apache-2.0
//
// The manager service: the aggregation core behind real sessions, timers
// and a display hub. Every input (session traffic, timer firings, operator
// requests) goes through one queue with one consumer, so the core sees
// events in arrival order and effects run in the order it emitted them.

#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "mnsm/core/aggregator.hpp"
#include "mnsm/manager/display.hpp"
#include "mnsm/manager/timer_service.hpp"
#include "mnsm/wire/registry_client.hpp"
#include "mnsm/wire/session.hpp"

namespace mnsm::manager {

struct ManagerOptions {
  std::string name = "manager";
  core::ManagerConfig config;
  wire::Endpoint registry;
  std::string host = "127.0.0.1";
  int port = 0;  // session listener; 0 picks one
  wire::Duration liveness{1000};
  /// Registration attempts before giving up; the registry must be up.
  wire::Duration register_deadline{5000};
  std::size_t display_backlog = kDefaultBacklog;
  /// Appended to when non-empty, in addition to the in-memory tail.
  std::filesystem::path log_file;
  bool echo_log = false;  // also write log lines to stderr
};

enum class NodeQuery { ok, unknown_node, not_connected, timed_out };

std::string_view to_string(NodeQuery q);

class Manager {
 public:
  /// Registers with the registry and starts serving. Throws
  /// std::invalid_argument for a bad config, wire::RegistryUnreachable if
  /// registration does not succeed in time.
  explicit Manager(ManagerOptions options);
  ~Manager();
  Manager(const Manager&) = delete;
  Manager& operator=(const Manager&) = delete;

  /// Blocks until stop().
  void wait();
  void stop();

  int port() const { return listener_->port(); }
  const std::string& name() const { return options_.name; }

  /// Queues a core event; the future completes once it has been ingested
  /// and its effects executed.
  std::future<void> submit(core::ManagerEvent event);

  core::ManagerState state() const;
  std::vector<std::string> published() const;
  std::vector<std::string> log_tail(std::size_t n) const;
  DisplayHub& display() { return display_; }

  /// Last `lines` lines of a node's log, fetched through its daemon.
  NodeQuery node_log(const std::string& node, std::size_t lines,
                     std::vector<std::string>& out,
                     wire::Duration timeout = wire::Duration(3000));

  std::size_t controllers() const;

 private:
  struct Hello {
    std::uint64_t id;
    std::string kind;
    std::string name;
  };
  struct Inbound {
    std::uint64_t id;
    wire::WireMessage msg;
  };
  struct Closed {
    std::uint64_t id;
  };
  struct Core {
    core::ManagerEvent event;
    std::shared_ptr<std::promise<void>> done;
  };
  struct Stop {};
  using Item = std::variant<Inbound, Closed, Core, Stop>;

  struct Peer {
    std::shared_ptr<wire::Session> session;
    std::string kind;  // empty until the peer identified itself
    std::string name;
  };

  void post(Item item);
  void on_accept(wire::Socket socket);
  void consume();
  void handle(Hello& h);
  void handle(Inbound& in);
  void handle(Closed& c);
  void ingest(const core::ManagerEvent& event);
  void execute(const core::Effect& effect);
  void send_aggregate(wire::Session& to, const std::string& state);
  void write_log(const std::string& line);

  ManagerOptions options_;
  core::Aggregator core_;
  DisplayHub display_;

  mutable std::mutex mu_;  // guards the queue and everything below it
  std::condition_variable cv_;
  std::deque<Item> queue_;
  bool stopping_ = false;
  bool stopped_ = false;
  core::ManagerState state_copy_;
  std::vector<std::string> published_;
  std::deque<std::string> log_;
  std::map<std::uint64_t, Peer> peers_;
  std::map<std::string, std::uint64_t> daemons_;  // node name -> peer id
  std::uint64_t next_peer_ = 1;
  std::uint64_t next_request_ = 1;
  std::map<std::uint64_t, std::shared_ptr<std::promise<std::vector<std::string>>>> log_requests_;
  std::ofstream log_out_;

  std::unique_ptr<TimerService> timers_;
  std::unique_ptr<wire::Listener> listener_;
  std::unique_ptr<wire::RegistryClient> registry_;
  std::thread consumer_;
};

}  // namespace mnsm::manager
