// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <iostream>

#include "mnsm/manager/config.hpp"
#include "mnsm/manager/manager.hpp"
#include "mnsm/manager/operator_api.hpp"
#include "signals.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mnsm manager"};
  std::optional<std::string> registry;
  std::string name = "manager", host = "127.0.0.1", timeout = "30s", log_file;
  int min_nodes = 1, max_nodes = 1000, max_errors = 0, port = 0, operator_port = -1;
  int liveness_ms = 1000;
  bool quiet = false;
  app.add_option("--registry", registry, "registry host:port (MNSM_REGISTRY wins)");
  app.add_option("--name", name, "service name to register");
  app.add_option("--host", host, "listen address");
  app.add_option("--port", port, "session port (0 picks one)");
  app.add_option("--min", min_nodes, "minimum nodes for START");
  app.add_option("--max", max_nodes, "maximum nodes activated by START");
  app.add_option("--max-errors", max_errors, "errors tolerated per epoch");
  app.add_option("--timeout", timeout, "transition and command timeout, e.g. 30s or 500ms");
  app.add_option("--operator-port", operator_port, "HTTP operator API port (0 picks one, -1 off)");
  app.add_option("--log-file", log_file, "append manager log lines here");
  app.add_option("--liveness", liveness_ms, "heartbeat interval in ms")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", quiet, "do not echo log lines to stderr");
  CLI11_PARSE(app, argc, argv);

  std::mutex mu;
  mnsm::manager::Manager* running = nullptr;
  bool stop_requested = false;
  mnsm::tools::on_termination([&] {
    std::lock_guard lock(mu);
    stop_requested = true;
    if (running) running->stop();
  });

  try {
    mnsm::manager::ManagerOptions o;
    o.name = name;
    o.registry = mnsm::wire::registry_endpoint(registry);
    o.host = host;
    o.port = port;
    o.config.min_nodes = min_nodes;
    o.config.max_nodes = max_nodes;
    o.config.max_errors = max_errors;
    o.config.timeout = mnsm::manager::parse_duration(timeout);
    o.liveness = std::chrono::milliseconds(liveness_ms);
    o.log_file = log_file;
    o.echo_log = !quiet;

    mnsm::manager::Manager manager(std::move(o));
    std::unique_ptr<mnsm::manager::OperatorApi> api;
    if (operator_port >= 0) {
      api = std::make_unique<mnsm::manager::OperatorApi>(manager, host, operator_port);
      std::cout << "operator API on " << host << ":" << api->port() << std::endl;
    }
    std::cout << "manager " << name << " on " << host << ":" << manager.port() << std::endl;
    {
      std::lock_guard lock(mu);
      running = &manager;
      if (stop_requested) manager.stop();
    }
    manager.wait();
    std::lock_guard lock(mu);
    running = nullptr;
  } catch (const std::exception& e) {
    std::cerr << "mnsm-manager: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
