// SPDX-License-Identifier: Apache-2.0
//
// Controller stub. `send` issues one command and, with --wait, blocks until
// the aggregate reaches a given state; `watch` prints the aggregate stream.

#include <unistd.h>

#include <CLI11.hpp>

#include <condition_variable>
#include <deque>
#include <iostream>
#include <mutex>

#include "mnsm/wire/registry_client.hpp"
#include "mnsm/wire/session.hpp"

namespace {

using namespace mnsm::wire;

class Controller {
 public:
  Controller(const Endpoint& registry, std::string self, const std::string& manager)
      : self_(std::move(self)) {
    RegistryClient rc(registry, self_);
    auto record = rc.lookup(manager);
    if (!record) throw std::runtime_error("no service named " + manager);
    session_ = Session::open(record->address, SessionOptions{self_});
    session_->start(
        [this](const WireMessage& m) {
          if (m.type != MessageType::STATE_REPORT) return;
          std::lock_guard lock(mu_);
          states_.push_back(m.str("state"));
          cv_.notify_all();
        },
        [this](CloseReason) {
          std::lock_guard lock(mu_);
          closed_ = true;
          cv_.notify_all();
        });
    session_->send(make_register(self_, "controller", "", 0));
  }
  ~Controller() { session_->close(); }

  bool closed() {
    std::lock_guard lock(mu_);
    return closed_ && states_.empty();
  }

  void send(const std::string& command) { session_->send(make_command(self_, command)); }

  /// Next aggregate, or nullopt on timeout or a closed session.
  std::optional<std::string> next(Duration timeout) {
    std::unique_lock lock(mu_);
    if (!cv_.wait_for(lock, timeout, [&] { return closed_ || !states_.empty(); })) return std::nullopt;
    if (states_.empty()) return std::nullopt;
    auto s = states_.front();
    states_.pop_front();
    return s;
  }

 private:
  std::string self_;
  std::shared_ptr<Session> session_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> states_;
  bool closed_ = false;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mnsm controller stub"};
  app.require_subcommand(1);
  std::optional<std::string> registry;
  std::string manager = "manager";
  std::string self = "ctl-" + std::to_string(::getpid());
  app.add_option("--registry", registry, "registry host:port (MNSM_REGISTRY wins)");
  app.add_option("--manager", manager, "manager service name");
  app.add_option("--name", self, "controller name");

  auto* send = app.add_subcommand("send", "send one command");
  std::string command;
  std::optional<std::string> wait_for;
  int timeout_ms = 60000;
  send->add_option("command", command, "START, RESET or any other command")->required();
  send->add_option("--wait", wait_for, "block until the aggregate equals this state");
  send->add_option("--timeout", timeout_ms, "give up waiting after this many ms");

  auto* watch = app.add_subcommand("watch", "print aggregate states as they are published");
  int count = 0;
  watch->add_option("--count", count, "exit after this many states (0 = forever)");
  CLI11_PARSE(app, argc, argv);

  try {
    Controller ctl(registry_endpoint(registry), self, manager);
    if (*send) {
      auto current = ctl.next(Duration(5000));
      if (!current) throw std::runtime_error("manager sent no initial aggregate");
      ctl.send(command);
      if (!wait_for) return 0;
      auto deadline = now_ms() + Duration(timeout_ms);
      while (now_ms() < deadline) {
        auto s = ctl.next(std::chrono::duration_cast<Duration>(deadline - now_ms()));
        if (!s) break;
        std::cout << *s << std::endl;
        if (*s == *wait_for) return 0;
      }
      std::cerr << "mnsm-ctl: aggregate did not reach " << *wait_for << '\n';
      return 2;
    }
    for (int seen = 0; count == 0 || seen < count;) {
      auto s = ctl.next(Duration(1000));
      if (!s && ctl.closed()) throw std::runtime_error("manager session closed");
      if (s) {
        std::cout << *s << std::endl;
        ++seen;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "mnsm-ctl: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
