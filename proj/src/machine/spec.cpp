// SPDX-License-Identifier: Apache-2.0

#include "mnsm/machine/spec.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

namespace mnsm::machine {

std::string_view to_string(StateClass cls) {
  switch (cls) {
    case StateClass::major: return "major";
    case StateClass::minor: return "minor";
    case StateClass::micro: return "micro";
    case StateClass::error: return "error";
  }
  return "major";
}

std::optional<StateClass> parse_state_class(std::string_view text) {
  if (text == "major") return StateClass::major;
  if (text == "minor") return StateClass::minor;
  if (text == "micro") return StateClass::micro;
  if (text == "error") return StateClass::error;
  return std::nullopt;
}

std::string_view to_string(Action action) {
  switch (action) {
    case Action::start_process: return "start_process";
    case Action::kill_process: return "kill_process";
    case Action::cleanup: return "cleanup";
    case Action::shutdown: return "shutdown";
  }
  return "cleanup";
}

std::optional<Action> parse_action(std::string_view text) {
  if (text == "start_process") return Action::start_process;
  if (text == "kill_process") return Action::kill_process;
  if (text == "cleanup") return Action::cleanup;
  if (text == "shutdown") return Action::shutdown;
  return std::nullopt;
}

Trigger Trigger::command(std::string name) {
  return Trigger{Kind::command, std::move(name), 0};
}
Trigger Trigger::exit(int code) { return Trigger{Kind::exit, {}, code}; }
Trigger Trigger::event(std::string name) {
  return Trigger{Kind::event, std::move(name), 0};
}
Trigger Trigger::disconnect() { return Trigger{Kind::disconnect, {}, 0}; }

std::string Trigger::describe() const {
  switch (kind) {
    case Kind::command: return "command " + name;
    case Kind::exit: return "exit " + std::to_string(code);
    case Kind::event: return "event " + name;
    case Kind::disconnect: return "disconnect";
  }
  return "disconnect";
}

bool TriggerPattern::matches(const Trigger& trigger) const {
  if (trigger.kind != kind) return false;
  switch (kind) {
    case Trigger::Kind::command:
    case Trigger::Kind::event:
      return trigger.name == name;
    case Trigger::Kind::exit:
      switch (exit_match) {
        case ExitMatch::code: return trigger.code == code;
        case ExitMatch::nonzero: return trigger.code != 0;
        case ExitMatch::any: return true;
      }
      return false;
    case Trigger::Kind::disconnect:
      return true;
  }
  return false;
}

std::string TriggerPattern::describe() const {
  switch (kind) {
    case Trigger::Kind::command: return "command " + name;
    case Trigger::Kind::event: return "event " + name;
    case Trigger::Kind::disconnect: return "disconnect";
    case Trigger::Kind::exit:
      switch (exit_match) {
        case ExitMatch::code: return "exit " + std::to_string(code);
        case ExitMatch::nonzero: return "exit nonzero";
        case ExitMatch::any: return "exit any";
      }
  }
  return "disconnect";
}

const StateDescriptor* MachineSpec::find_state(std::string_view state) const {
  auto it = std::find_if(states.begin(), states.end(),
                         [&](const StateDescriptor& s) { return s.name == state; });
  return it == states.end() ? nullptr : &*it;
}

const StateDescriptor& MachineSpec::initial() const {
  for (const auto& s : states) {
    if (s.is_initial) return s;
  }
  throw std::logic_error("machine spec has no initial state");
}

const StateDescriptor* MachineSpec::first_error_state() const {
  for (const auto& s : states) {
    if (s.cls == StateClass::error) return &s;
  }
  return nullptr;
}

ParseError::ParseError(Kind kind, int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what),
      kind_(kind),
      line_(line) {}

std::string print_spec(const MachineSpec& spec) {
  std::ostringstream out;
  out << "machine " << spec.name << "\n";
  for (const auto& s : spec.states) {
    out << "state " << s.name << " class=" << to_string(s.cls)
        << " color=" << s.color;
    if (s.is_initial) out << " initial";
    out << "\n";
  }
  for (const auto& r : spec.rules) {
    out << "trans " << r.from.value_or("*") << " on " << r.trigger.describe();
    if (!r.actions.empty()) {
      out << " do ";
      for (std::size_t i = 0; i < r.actions.size(); ++i) {
        if (i) out << ",";
        out << to_string(r.actions[i]);
      }
    }
    out << " -> " << r.to << "\n";
  }
  return out.str();
}

std::vector<std::string> unreachable_states(const MachineSpec& spec) {
  std::set<std::string> seen{std::string(kReadyState)};
  std::deque<std::string> frontier{std::string(kReadyState)};
  while (!frontier.empty()) {
    auto here = frontier.front();
    frontier.pop_front();
    for (const auto& r : spec.rules) {
      if (r.from && *r.from != here) continue;
      if (seen.insert(r.to).second) frontier.push_back(r.to);
    }
  }
  // Unmatched child exits fall into the first error state.
  if (const auto* err = spec.first_error_state()) seen.insert(err->name);

  std::vector<std::string> out;
  for (const auto& s : spec.states) {
    if (!seen.count(s.name)) out.push_back(s.name);
  }
  return out;
}

std::string_view to_string(ReportDecision decision) {
  switch (decision) {
    case ReportDecision::report_major: return "report-major";
    case ReportDecision::report_minor: return "report-minor";
    case ReportDecision::suppress: return "suppress";
  }
  return "suppress";
}

ReportDecision report_decision(const MachineSpec& spec, std::string_view state) {
  const auto* desc = spec.find_state(state);
  if (!desc) throw std::invalid_argument("undeclared state " + std::string(state));
  switch (desc->cls) {
    case StateClass::major:
    case StateClass::error:
      return ReportDecision::report_major;
    case StateClass::minor:
      return ReportDecision::report_minor;
    case StateClass::micro:
      return ReportDecision::suppress;
  }
  return ReportDecision::suppress;
}

}  // namespace mnsm::machine
