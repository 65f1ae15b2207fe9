// SPDX-License-Identifier: Apache-2.0
//
// Two session endpoints joined by an in-memory link under a virtual clock.
// Used to check ordering and liveness-bound behaviour deterministically.

#pragma once

#include <array>
#include <deque>
#include <optional>
#include <vector>

#include "mnsm/wire/liveness.hpp"

namespace mnsm::wire {

class SimulatedLink {
 public:
  enum Side { kA = 0, kB = 1 };

  SimulatedLink(std::string name_a, std::string name_b, Duration interval,
                Duration latency);

  TimePoint now() const { return now_; }

  bool send(Side from, WireMessage msg);

  /// Drops everything in flight and everything sent from now on.
  void sever() { severed_ = true; in_flight_.clear(); }

  /// Advances virtual time one millisecond at a time, delivering frames and
  /// polling both endpoints at each step.
  void advance_to(TimePoint until);

  const std::vector<WireMessage>& delivered(Side to) const { return delivered_[to]; }
  std::optional<TimePoint> dead_at(Side side) const { return dead_at_[side]; }
  /// Arrival time of the most recent frame (any type) at `side`.
  std::optional<TimePoint> last_arrival(Side side) const { return last_arrival_[side]; }
  /// Send time of the most recent frame (any type) leaving `side`.
  std::optional<TimePoint> last_departure(Side side) const { return last_departure_[side]; }

 private:
  struct Frame {
    Side to;
    TimePoint arrival;
    std::string line;
  };

  bool write(Side from, const std::string& line);

  TimePoint now_{};
  Duration latency_;
  bool severed_ = false;
  std::deque<Frame> in_flight_;
  std::array<std::optional<SessionProtocol>, 2> ends_;
  std::array<std::vector<WireMessage>, 2> delivered_;
  std::array<std::optional<TimePoint>, 2> dead_at_;
  std::array<std::optional<TimePoint>, 2> last_arrival_;
  std::array<std::optional<TimePoint>, 2> last_departure_;
};

}  // namespace mnsm::wire
