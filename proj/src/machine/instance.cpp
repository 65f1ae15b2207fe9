// SPDX-License-Identifier: Apache-2.0

#include "mnsm/machine/instance.hpp"

#include <stdexcept>

namespace mnsm::machine {

const TransitionRule* match_rule(const MachineSpec& spec, std::string_view state,
                                 const Trigger& trigger) {
  const TransitionRule* wildcard = nullptr;
  for (const auto& rule : spec.rules) {
    if (!rule.trigger.matches(trigger)) continue;
    if (rule.from) {
      if (*rule.from == state) return &rule;
    } else if (!wildcard) {
      wildcard = &rule;
    }
  }
  return wildcard;
}

MachineInstance::MachineInstance(std::shared_ptr<const MachineSpec> spec)
    : spec_(std::move(spec)), current_(spec_->initial().name) {}

const StateDescriptor& MachineInstance::current_descriptor() const {
  return *spec_->find_state(current_);
}

std::optional<TransitionOutcome> MachineInstance::fire(const Trigger& trigger) {
  const auto* rule = match_rule(*spec_, current_, trigger);
  if (!rule) return std::nullopt;
  TransitionOutcome out{rule->actions, current_, rule->to, rule->line};
  current_ = rule->to;
  return out;
}

void MachineInstance::force(const std::string& state) {
  if (!spec_->find_state(state)) {
    throw std::invalid_argument("undeclared state " + state);
  }
  current_ = state;
}

}  // namespace mnsm::machine
