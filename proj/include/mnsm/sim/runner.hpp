// SPDX-License-Identifier: Apache-2.0
//
// Single-threaded discrete-event runner. Everything scheduled for the same
// tick runs in a fixed order: deliveries, then node script steps, then the
// controller, then timers. Within a class, ties go to node name and then
// to scheduling order; a seeded scenario replaces the name order with a
// seed-derived permutation and adds delivery jitter, never reordering the
// messages of one link.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "mnsm/core/types.hpp"
#include "mnsm/sim/scenario.hpp"
#include "mnsm/sim/trace.hpp"

namespace mnsm::sim {

struct RunResult {
  Trace trace;
  core::ManagerState final_state;
  Tick end_time = 0;
  bool hit_time_limit = false;
  /// Machine-mode nodes: machine state at the end of the run.
  std::map<std::string, std::string> node_states;
  /// Commands each node actually received, in order.
  std::map<std::string, std::vector<std::string>> received;

  std::vector<std::string> published() const { return trace.published(); }
};

RunResult run_scenario(const Scenario& scenario);

}  // namespace mnsm::sim
