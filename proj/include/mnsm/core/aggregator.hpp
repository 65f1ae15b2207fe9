// SPDX-License-Identifier: Apache-2.0
//
// The manager's aggregation logic as a pure event -> effects function. No
// clocks, sockets or threads: timers are requested through SetTimer effects
// and come back as TimerFired events carrying the generation they were
// armed with, so a firing that lost a race with a cancel is recognised and
// dropped.

#pragma once

#include "mnsm/core/types.hpp"

namespace mnsm::core {

struct Step {
  ManagerState state;
  Effects effects;
};

/// Pure form: (state, event) -> (state', effects).
Step ingest(ManagerState state, const ManagerEvent& event);

/// Owns a ManagerState and feeds it events one at a time.
class Aggregator {
 public:
  explicit Aggregator(ManagerConfig config = {});
  explicit Aggregator(ManagerState state) : state_(std::move(state)) {}

  Effects ingest(const ManagerEvent& event);
  const ManagerState& state() const { return state_; }

 private:
  ManagerState state_;
};

}  // namespace mnsm::core
