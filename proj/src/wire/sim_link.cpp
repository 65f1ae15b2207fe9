// SPDX-License-Identifier: Apache-2.0

#include "mnsm/wire/sim_link.hpp"

namespace mnsm::wire {

SimulatedLink::SimulatedLink(std::string name_a, std::string name_b, Duration interval,
                             Duration latency)
    : latency_(latency) {
  ends_[kA].emplace(std::move(name_a), interval,
                    [this](const std::string& line) { return write(kA, line); });
  ends_[kB].emplace(std::move(name_b), interval,
                    [this](const std::string& line) { return write(kB, line); });
  ends_[kA]->start(now_);
  ends_[kB]->start(now_);
}

bool SimulatedLink::write(Side from, const std::string& line) {
  last_departure_[from] = now_;
  if (severed_) return true;  // the sender cannot tell
  in_flight_.push_back(Frame{from == kA ? kB : kA, now_ + latency_, line});
  return true;
}

bool SimulatedLink::send(Side from, WireMessage msg) {
  return ends_[from]->send(std::move(msg), now_);
}

void SimulatedLink::advance_to(TimePoint until) {
  while (now_ < until) {
    now_ += Duration(1);
    // Frames are queued in send order with equal latency, so arrival order
    // equals send order per direction.
    while (!in_flight_.empty() && in_flight_.front().arrival <= now_) {
      auto frame = std::move(in_flight_.front());
      in_flight_.pop_front();
      last_arrival_[frame.to] = now_;
      if (auto msg = ends_[frame.to]->receive_line(frame.line, now_)) {
        delivered_[frame.to].push_back(std::move(*msg));
      }
    }
    for (auto side : {kA, kB}) {
      if (ends_[side]->poll(now_) && !dead_at_[side]) dead_at_[side] = now_;
    }
  }
}

}  // namespace mnsm::wire
