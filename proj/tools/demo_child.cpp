// SPDX-License-Identifier: Apache-2.0
//
// Scripted workload for demos and integration tests: prints EVENT lines on
// a schedule, then lingers and exits with a chosen code.

#include <signal.h>
#include <unistd.h>

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <sstream>
#include <thread>

int main(int argc, char** argv) {
  CLI::App app{"mnsm demo child"};
  std::string events;
  int linger_ms = -1, exit_code = 0, noise = 0;
  bool ignore_term = false;
  app.add_option("--events", events, "comma list of name@delay_ms, e.g. connecting@100,allocated@50");
  app.add_option("--linger", linger_ms, "ms to stay up after the last event (-1 = until killed)");
  app.add_option("--exit", exit_code, "exit code after lingering");
  app.add_option("--noise", noise, "plain log lines to print first");
  app.add_flag("--ignore-term", ignore_term, "ignore SIGTERM (forces SIGKILL escalation)");
  CLI11_PARSE(app, argc, argv);

  if (ignore_term) ::signal(SIGTERM, SIG_IGN);
  std::cout << "demo child " << ::getpid() << " up" << std::endl;
  for (int i = 0; i < noise; ++i) std::cout << "work item " << i << '\n';
  std::cout << std::flush;

  std::stringstream list(events);
  std::string item;
  while (std::getline(list, item, ',')) {
    if (item.empty()) continue;
    auto at = item.find('@');
    auto name = item.substr(0, at);
    int delay = at == std::string::npos ? 0 : std::stoi(item.substr(at + 1));
    std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    std::cout << "EVENT " << name << std::endl;
  }

  if (linger_ms < 0) {
    for (;;) ::pause();
  }
  std::this_thread::sleep_for(std::chrono::milliseconds(linger_ms));
  std::cout << "demo child exiting with " << exit_code << std::endl;
  return exit_code;
}
