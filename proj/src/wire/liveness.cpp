// SPDX-License-Identifier: Apache-2.0

#include "mnsm/wire/liveness.hpp"

#include <algorithm>
#include <stdexcept>

namespace mnsm::wire {

LivenessMonitor::LivenessMonitor(Duration interval, int grace_factor)
    : interval_(interval), grace_factor_(grace_factor) {
  if (interval_ <= Duration::zero() || grace_factor_ < 1) {
    throw std::invalid_argument("liveness interval and grace factor must be positive");
  }
}

void LivenessMonitor::start(TimePoint now) {
  last_rx_ = now;
  last_tx_ = now;
}

TimePoint LivenessMonitor::next_deadline() const {
  return std::min(last_tx_ + interval_, last_rx_ + deadline_span());
}

SessionProtocol::SessionProtocol(std::string self, Duration interval, FrameWriter writer,
                                 int grace_factor)
    : self_(std::move(self)), monitor_(interval, grace_factor), writer_(std::move(writer)) {}

void SessionProtocol::start(TimePoint now) {
  monitor_.start(now);
  next_seq_ = 0;
  last_peer_seq_.reset();
  dead_ = false;
}

bool SessionProtocol::send(WireMessage msg, TimePoint now) {
  if (dead_) return false;
  msg.sender = self_;
  msg.seq = next_seq_++;
  if (!writer_(encode_message(msg))) return false;
  monitor_.on_sent(now);
  return true;
}

std::optional<WireMessage> SessionProtocol::receive_line(std::string_view line,
                                                         TimePoint now) {
  monitor_.on_received(now);
  auto msg = decode_message(line);
  if (last_peer_seq_ && msg.seq != *last_peer_seq_ + 1) ++seq_gaps_;
  last_peer_seq_ = msg.seq;
  if (msg.type == MessageType::HEARTBEAT) return std::nullopt;
  return msg;
}

bool SessionProtocol::poll(TimePoint now) {
  if (dead_) return false;
  if (monitor_.dead(now)) {
    dead_ = true;
    return true;
  }
  if (monitor_.heartbeat_due(now)) send(make_heartbeat(self_), now);
  return false;
}

}  // namespace mnsm::wire
