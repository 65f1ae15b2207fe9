// SPDX-License-Identifier: Apache-2.0
//
// Wall-clock timers for the manager. Firings carry the generation they
// were armed with; the core drops any that a cancel overtook.

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <thread>

#include "mnsm/core/types.hpp"

namespace mnsm::manager {

class TimerService {
 public:
  using FireFn = std::function<void(core::TimerKind, std::uint64_t generation)>;

  explicit TimerService(FireFn on_fire);
  ~TimerService();
  TimerService(const TimerService&) = delete;
  TimerService& operator=(const TimerService&) = delete;

  void arm(core::TimerKind kind, std::uint64_t generation, std::chrono::milliseconds timeout);
  void cancel(std::uint64_t generation);
  std::size_t armed() const;

 private:
  using Clock = std::chrono::steady_clock;
  struct Entry {
    core::TimerKind kind;
    Clock::time_point deadline;
  };
  void run();

  FireFn on_fire_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::uint64_t, Entry> timers_;
  bool stopping_ = false;
  std::thread thread_;
};

}  // namespace mnsm::manager
