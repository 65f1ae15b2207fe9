// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "mnsm/wire/message.hpp"

namespace mnsm::wire {

using Clock = std::chrono::steady_clock;
using Duration = std::chrono::milliseconds;
using TimePoint = std::chrono::time_point<Clock, Duration>;

inline TimePoint now_ms() {
  return std::chrono::time_point_cast<Duration>(Clock::now());
}

/// Peer is dead once nothing has been received for grace_factor * interval.
class LivenessMonitor {
 public:
  explicit LivenessMonitor(Duration interval, int grace_factor = 3);

  void start(TimePoint now);
  void on_received(TimePoint now) { last_rx_ = now; }
  void on_sent(TimePoint now) { last_tx_ = now; }

  bool heartbeat_due(TimePoint now) const { return now - last_tx_ >= interval_; }
  bool dead(TimePoint now) const { return now - last_rx_ >= deadline_span(); }

  /// Earliest instant at which heartbeat_due or dead can change.
  TimePoint next_deadline() const;

  Duration interval() const { return interval_; }
  Duration deadline_span() const { return interval_ * grace_factor_; }
  TimePoint last_received() const { return last_rx_; }

 private:
  Duration interval_;
  int grace_factor_;
  TimePoint last_rx_{};
  TimePoint last_tx_{};
};

/// Per-connection framing state shared by the TCP and simulated transports:
/// stamps outgoing frames with sender and seq, emits heartbeats, tracks
/// peer liveness. Not thread-safe; the owning transport serializes access.
class SessionProtocol {
 public:
  using FrameWriter = std::function<bool(const std::string&)>;

  SessionProtocol(std::string self, Duration interval, FrameWriter writer,
                  int grace_factor = 3);

  void start(TimePoint now);

  /// Stamps and writes. False if the writer failed or the session is dead.
  bool send(WireMessage msg, TimePoint now);

  /// Feeds one received line. Heartbeats only refresh liveness and yield
  /// nullopt. Throws DecodeError for bad frames (liveness still refreshed).
  std::optional<WireMessage> receive_line(std::string_view line, TimePoint now);

  /// Sends a heartbeat if one is due. Returns true exactly once, on the
  /// call that first observes the peer as dead.
  bool poll(TimePoint now);

  bool is_dead() const { return dead_; }
  TimePoint next_deadline() const { return monitor_.next_deadline(); }
  const LivenessMonitor& monitor() const { return monitor_; }

  std::uint64_t next_seq() const { return next_seq_; }
  std::uint64_t seq_gaps() const { return seq_gaps_; }

 private:
  std::string self_;
  LivenessMonitor monitor_;
  FrameWriter writer_;
  std::uint64_t next_seq_ = 0;
  std::optional<std::uint64_t> last_peer_seq_;
  std::uint64_t seq_gaps_ = 0;
  bool dead_ = false;
};

}  // namespace mnsm::wire
