// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <iostream>

#include "mnsm/machine/spec.hpp"
#include "mnsm/node/daemon.hpp"
#include "signals.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mnsm node daemon"};
  std::string spec_path, name, manager = "manager", log_dir = ".", exec, host = "127.0.0.1";
  std::optional<std::string> registry;
  int liveness_ms = 1000, grace_ms = 5000;
  app.add_option("--spec", spec_path, "state machine spec file")->required()->check(CLI::ExistingFile);
  app.add_option("--name", name, "node name")->required();
  app.add_option("--manager", manager, "manager service name");
  app.add_option("--log-dir", log_dir, "directory for <name>.log");
  app.add_option("--exec", exec, "child command line")->required();
  app.add_option("--registry", registry, "registry host:port (MNSM_REGISTRY wins)");
  app.add_option("--host", host, "address advertised to the registry");
  app.add_option("--liveness", liveness_ms, "heartbeat interval in ms")->check(CLI::PositiveNumber);
  app.add_option("--kill-grace", grace_ms, "ms between SIGTERM and SIGKILL")->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);

  mnsm::node::Daemon* running = nullptr;
  bool stop_requested = false;
  std::mutex mu;
  mnsm::tools::on_termination([&] {
    std::lock_guard lock(mu);
    stop_requested = true;
    if (running) running->stop();
  });

  try {
    mnsm::node::DaemonOptions o;
    o.name = name;
    o.manager = manager;
    o.registry = mnsm::wire::registry_endpoint(registry);
    o.log_dir = log_dir;
    o.exec = exec;
    o.spec = std::make_shared<const mnsm::machine::MachineSpec>(
        mnsm::machine::load_spec_file(spec_path));
    o.host = host;
    o.liveness = std::chrono::milliseconds(liveness_ms);
    o.kill_grace = std::chrono::milliseconds(grace_ms);

    std::filesystem::create_directories(o.log_dir);
    mnsm::node::Daemon daemon(std::move(o));
    {
      std::lock_guard lock(mu);
      running = &daemon;
      if (stop_requested) daemon.stop();
    }
    daemon.run();
    std::lock_guard lock(mu);
    running = nullptr;
  } catch (const std::exception& e) {
    std::cerr << "mnsm-daemon: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
