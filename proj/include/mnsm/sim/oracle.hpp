// SPDX-License-Identifier: Apache-2.0
//
// A second, deliberately naive statement of the aggregation rules. It keeps
// explicit sets and full per-node report histories for the current command
// epoch and, after every input, re-derives the whole expected aggregate
// trajectory of that epoch from scratch. Nothing here is shared with the
// core beyond the vocabulary types.

#pragma once

#include <set>
#include <string>
#include <vector>

#include "mnsm/core/types.hpp"

namespace mnsm::sim {

struct OracleInput {
  enum class Kind { connect, disconnect, report, command, timeout };

  Kind kind = Kind::report;
  std::string node;
  std::string state;  // report state, or command name
  core::ReportClass cls = core::ReportClass::major;

  static OracleInput connect(std::string node);
  static OracleInput disconnect(std::string node);
  static OracleInput report(std::string node, std::string state,
                            core::ReportClass cls = core::ReportClass::major);
  static OracleInput command(std::string name);
  static OracleInput timeout();

  std::string describe() const;
};

struct OracleOutcome {
  std::vector<std::string> published;
  /// Commands the manager should have sent, as "node:COMMAND".
  std::vector<std::string> sends;
  std::set<std::string> unavailable;
};

/// Feeds a totally ordered input sequence through the oracle.
OracleOutcome oracle_aggregate(const std::vector<OracleInput>& inputs,
                               const core::ManagerConfig& config);

/// Converts a core event into oracle vocabulary. Operator actions and
/// config changes have no oracle counterpart and yield false.
bool to_oracle_input(const core::ManagerEvent& event, OracleInput& out);

}  // namespace mnsm::sim
