// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <pthread.h>
#include <signal.h>

#include <functional>
#include <thread>

namespace mnsm::tools {

/// Blocks SIGINT/SIGTERM process-wide (call before starting any thread)
/// and returns a detached waiter that runs `on_signal` once one arrives.
inline void on_termination(std::function<void()> on_signal) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::thread([set, fn = std::move(on_signal)] {
    int sig = 0;
    sigwait(&set, &sig);
    fn();
  }).detach();
}

}  // namespace mnsm::tools
