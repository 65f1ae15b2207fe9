// SPDX-License-Identifier: Apache-2.0

#include "mnsm/manager/timer_service.hpp"

#include <vector>

namespace mnsm::manager {

TimerService::TimerService(FireFn on_fire) : on_fire_(std::move(on_fire)) {
  thread_ = std::thread([this] { run(); });
}

TimerService::~TimerService() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

void TimerService::arm(core::TimerKind kind, std::uint64_t generation,
                       std::chrono::milliseconds timeout) {
  {
    std::lock_guard lock(mu_);
    timers_[generation] = Entry{kind, Clock::now() + timeout};
  }
  cv_.notify_all();
}

void TimerService::cancel(std::uint64_t generation) {
  std::lock_guard lock(mu_);
  timers_.erase(generation);
}

std::size_t TimerService::armed() const {
  std::lock_guard lock(mu_);
  return timers_.size();
}

void TimerService::run() {
  std::unique_lock lock(mu_);
  while (!stopping_) {
    if (timers_.empty()) {
      cv_.wait(lock);
      continue;
    }
    auto next = timers_.begin();
    for (auto it = timers_.begin(); it != timers_.end(); ++it) {
      if (it->second.deadline < next->second.deadline) next = it;
    }
    if (auto deadline = next->second.deadline; Clock::now() < deadline) {
      cv_.wait_until(lock, deadline);
      continue;
    }
    auto gen = next->first;
    auto kind = next->second.kind;
    timers_.erase(next);
    lock.unlock();
    on_fire_(kind, gen);
    lock.lock();
  }
}

}  // namespace mnsm::manager
