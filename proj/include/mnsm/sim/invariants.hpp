// SPDX-License-Identifier: Apache-2.0
//
// Whole-run property checks over a sequence of core steps.

#pragma once

#include <optional>
#include <set>
#include <string>

#include "mnsm/core/types.hpp"

namespace mnsm::sim {

/// Checks one state in isolation: node-ledger and phase invariants.
std::optional<std::string> check_state(const core::ManagerState& state);

/// Tracks properties that span steps: the ERROR latch, timer pairing,
/// published names drawn only from reports, coherence at publish time.
class InvariantMonitor {
 public:
  /// Returns the first violation seen on this step, if any.
  std::optional<std::string> observe(const core::ManagerEvent& event,
                                     const core::ManagerState& after,
                                     const core::Effects& effects);

  /// Timers set but never cancelled or consumed.
  std::set<std::uint64_t> open_timers() const { return open_timers_; }

 private:
  bool latched_ = false;
  std::set<std::string> reported_majors_;
  std::set<std::uint64_t> open_timers_;
  std::set<std::uint64_t> ever_set_;
};

}  // namespace mnsm::sim
