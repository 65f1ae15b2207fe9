// SPDX-License-Identifier: Apache-2.0
//
// HTTP API for operator consoles:
//   GET  /nodes                      snapshot {seq, nodes[], summary}
//   GET  /aggregate                  summary
//   GET  /config, PUT /config        parameters (PUT takes effect at the next epoch)
//   POST /nodes/{name}/kill|restart|clear-unavailable
//   GET  /nodes/{name}/log?lines=N
//   POST /command {"name": "START"}
//   GET  /events                     server-sent events: snapshot, then updates

#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace mnsm::manager {

class Manager;

class OperatorApi {
 public:
  /// Binds immediately; port 0 picks one. Throws std::runtime_error if the
  /// address cannot be bound.
  OperatorApi(Manager& manager, const std::string& host, int port);
  ~OperatorApi();
  OperatorApi(const OperatorApi&) = delete;
  OperatorApi& operator=(const OperatorApi&) = delete;

  int port() const { return port_; }
  void stop();

 private:
  void routes();

  Manager& manager_;
  std::unique_ptr<httplib::Server> server_;
  std::atomic<bool> stopping_{false};
  int port_ = 0;
  std::thread thread_;
};

}  // namespace mnsm::manager
