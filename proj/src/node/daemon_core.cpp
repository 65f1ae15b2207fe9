// SPDX-License-Identifier: Apache-2.0

#include "mnsm/node/daemon_core.hpp"

namespace mnsm::node {

using machine::Trigger;

DaemonCore::DaemonCore(std::shared_ptr<const machine::MachineSpec> spec)
    : machine_(std::move(spec)) {}

std::optional<StateReport> DaemonCore::report_for(const std::string& detail) const {
  const auto& desc = machine_.current_descriptor();
  if (machine::report_decision(machine_.spec(), desc.name) == machine::ReportDecision::suppress) {
    return std::nullopt;
  }
  return StateReport{desc.name, desc.cls, desc.color, detail};
}

std::optional<StateReport> DaemonCore::current_report() const { return report_for({}); }

DaemonStep DaemonCore::handle(const Trigger& trigger) {
  DaemonStep step;
  const std::string detail =
      trigger.kind == Trigger::Kind::exit ? "exit " + std::to_string(trigger.code) : std::string();
  const std::string before = machine_.current();

  auto outcome = machine_.fire(trigger);
  if (!outcome) {
    if (trigger.kind == Trigger::Kind::exit) {
      if (const auto* err = machine_.spec().first_error_state()) {
        machine_.force(err->name);
        step.report = report_for(detail);
        step.log = before + ": unmatched " + trigger.describe() + ", forced to " + err->name;
        return step;
      }
    }
    step.log = before + ": no rule for " + trigger.describe() + ", ignored";
    return step;
  }

  step.matched = true;
  step.actions = outcome->actions;
  step.log = outcome->old_state + " --" + trigger.describe() + "--> " + outcome->new_state;
  if (outcome->new_state != outcome->old_state || trigger.kind == Trigger::Kind::command) {
    step.report = report_for(detail);
  }
  return step;
}

}  // namespace mnsm::node
