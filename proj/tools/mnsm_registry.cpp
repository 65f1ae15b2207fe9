// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <condition_variable>
#include <iostream>
#include <mutex>

#include "mnsm/wire/registry.hpp"
#include "signals.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mnsm name service"};
  std::string host = "127.0.0.1";
  int port = mnsm::wire::kDefaultRegistryPort;
  int liveness_ms = 1000;
  app.add_option("--host", host, "listen address");
  app.add_option("--port,--registry-port", port, "listen port (0 picks one)");
  app.add_option("--liveness", liveness_ms, "heartbeat interval in ms")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  std::mutex mu;
  std::condition_variable cv;
  bool done = false;
  mnsm::tools::on_termination([&] {
    std::lock_guard lock(mu);
    done = true;
    cv.notify_all();
  });

  try {
    mnsm::wire::RegistryServer server(host, port, std::chrono::milliseconds(liveness_ms));
    std::cout << "registry listening on " << host << ":" << server.port() << std::endl;
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return done; });
    server.stop();
  } catch (const std::exception& e) {
    std::cerr << "mnsm-registry: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
