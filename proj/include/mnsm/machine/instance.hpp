// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mnsm/machine/spec.hpp"

namespace mnsm::machine {

struct TransitionOutcome {
  std::vector<Action> actions;
  std::string old_state;
  std::string new_state;
  int rule_line = 0;

  bool operator==(const TransitionOutcome&) const = default;
};

/// Highest-precedence rule for (state, trigger): exact-from rules beat the
/// wildcard, then first declared wins. nullptr if none matches.
const TransitionRule* match_rule(const MachineSpec& spec,
                                 std::string_view state,
                                 const Trigger& trigger);

/// A running machine. Starts in READY; current() is always a declared state.
class MachineInstance {
 public:
  explicit MachineInstance(std::shared_ptr<const MachineSpec> spec);

  const MachineSpec& spec() const { return *spec_; }
  std::shared_ptr<const MachineSpec> spec_ptr() const { return spec_; }
  const std::string& current() const { return current_; }
  const StateDescriptor& current_descriptor() const;

  /// Applies the matching rule. Returns nullopt (no-rule) and leaves the
  /// state unchanged when nothing matches.
  std::optional<TransitionOutcome> fire(const Trigger& trigger);

  /// Forces the machine into a declared state. Used by the daemon's
  /// unmatched-exit fallback.
  void force(const std::string& state);

 private:
  std::shared_ptr<const MachineSpec> spec_;
  std::string current_;
};

}  // namespace mnsm::machine
