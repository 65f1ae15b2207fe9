// SPDX-License-Identifier: Apache-2.0
//
// What a daemon does with one trigger, minus the I/O: the machine
// transition, the actions to run and the report (if any) to send.

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mnsm/machine/instance.hpp"

namespace mnsm::node {

struct StateReport {
  std::string state;
  machine::StateClass cls = machine::StateClass::major;
  std::string color;
  std::string detail;

  bool operator==(const StateReport&) const = default;
};

struct DaemonStep {
  std::vector<machine::Action> actions;
  std::optional<StateReport> report;
  std::string log;  // one line describing what happened
  bool matched = false;
};

class DaemonCore {
 public:
  explicit DaemonCore(std::shared_ptr<const machine::MachineSpec> spec);

  /// Applies one trigger. A state change is reported (subject to the
  /// class rules), and so is the resulting state of any manager command,
  /// changed or not, so the manager always hears back. A child exit no
  /// rule covers forces the first error-class state; every other
  /// unmatched trigger is only logged.
  DaemonStep handle(const machine::Trigger& trigger);

  /// The current state as a report, or nullopt for a micro state.
  std::optional<StateReport> current_report() const;

  const std::string& state() const { return machine_.current(); }
  const machine::MachineSpec& spec() const { return machine_.spec(); }

 private:
  std::optional<StateReport> report_for(const std::string& detail) const;

  machine::MachineInstance machine_;
};

}  // namespace mnsm::node
