// SPDX-License-Identifier: Apache-2.0
//
// Newline-delimited trace files: one header line, then one line per core
// step with its virtual time, the event and every effect it produced.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mnsm/core/types.hpp"
#include "mnsm/sim/scenario.hpp"

namespace mnsm::sim {

struct TraceRecord {
  Tick t = 0;
  core::ManagerEvent event;
  core::Effects effects;
};

struct Trace {
  std::string name;
  core::ManagerConfig config;  // in force when the first event arrived
  std::vector<TraceRecord> records;

  std::vector<std::string> published() const;
  std::string to_jsonl() const;
  /// Throws std::invalid_argument with the offending line number.
  static Trace from_jsonl(std::string_view text);
};

struct ReplayResult {
  std::size_t records = 0;
  std::optional<std::size_t> first_mismatch;  // record index
  std::string detail;

  bool ok() const { return !first_mismatch; }
};

/// Feeds the trace's events into a fresh core and compares every effect.
ReplayResult replay(const Trace& trace);

}  // namespace mnsm::sim
