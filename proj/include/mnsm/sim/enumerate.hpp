// SPDX-License-Identifier: Apache-2.0
//
// Exhaustive interleaving check: every merge of per-lane item sequences is
// run through a fresh core and through the oracle, and the published
// aggregate sequences are compared.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mnsm/core/types.hpp"
#include "mnsm/sim/oracle.hpp"

namespace mnsm::sim {

inline constexpr std::uint64_t kInterleavingGuard = 100000;

class ExplosionGuardExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LaneItem {
  enum class Kind { report, error, disconnect, command, timeout };
  Kind kind = Kind::report;
  std::string value;  // state or command name

  static LaneItem report(std::string state) { return {Kind::report, std::move(state)}; }
  static LaneItem error(std::string state) { return {Kind::error, std::move(state)}; }
  static LaneItem disconnect() { return {Kind::disconnect, {}}; }
  static LaneItem command(std::string name) { return {Kind::command, std::move(name)}; }
  static LaneItem timeout() { return {Kind::timeout, {}}; }
};

/// Items of one lane keep their relative order in every interleaving. A lane
/// is owned by a node, or by the controller when `node` is empty.
struct Lane {
  std::string node;
  std::vector<LaneItem> items;
};

struct EnumerationCase {
  std::vector<std::string> nodes;
  std::vector<Lane> lanes;
  core::ManagerConfig config;
  /// Connect every node, have each report READY, then START.
  bool start = true;
};

struct Counterexample {
  std::vector<std::string> steps;  // human-readable interleaving
  std::vector<std::string> core_published;
  std::vector<std::string> oracle_published;
  std::string reason;
};

struct EnumerationResult {
  std::uint64_t interleavings = 0;
  std::uint64_t mismatches = 0;
  std::uint64_t invariant_violations = 0;
  std::optional<Counterexample> first_counterexample;
  /// Core's published sequence -> number of interleavings producing it.
  std::map<std::vector<std::string>, std::uint64_t> outcomes;
  /// Interleavings where any SendToNode escaped an ERROR latch.
  std::uint64_t latch_breaks = 0;

  bool clean() const { return mismatches == 0 && invariant_violations == 0; }
  bool all_end_with(const std::string& state) const;
};

/// Number of interleavings of the given lanes (multinomial coefficient),
/// saturating at UINT64_MAX.
std::uint64_t count_interleavings(const std::vector<Lane>& lanes);

/// Throws ExplosionGuardExceeded above `guard` interleavings.
EnumerationResult enumerate_interleavings(const EnumerationCase& c,
                                          std::uint64_t guard = kInterleavingGuard);

/// Case file form used by `mnsm-sim enumerate`.
EnumerationCase enumeration_case_from_json(const nlohmann::json& j);

}  // namespace mnsm::sim
