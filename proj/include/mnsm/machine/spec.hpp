// SPDX-License-Identifier: Apache-2.0
//
// Daemon-side state machine description: states, classes, triggers, rules.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mnsm::machine {

inline constexpr std::string_view kReadyState = "READY";

/// How a daemon state is treated by the manager.
///   major - aggregated and reported upstream
///   minor - displayed only
///   micro - never leaves the daemon
///   error - displayed as a distinct state, counted by the manager
enum class StateClass { major, minor, micro, error };

std::string_view to_string(StateClass cls);
std::optional<StateClass> parse_state_class(std::string_view text);

struct StateDescriptor {
  std::string name;
  StateClass cls = StateClass::major;
  std::string color;
  bool is_initial = false;

  bool operator==(const StateDescriptor&) const = default;
};

enum class Action { start_process, kill_process, cleanup, shutdown };

std::string_view to_string(Action action);
std::optional<Action> parse_action(std::string_view text);

/// A concrete occurrence fed into a machine instance.
struct Trigger {
  enum class Kind { command, exit, event, disconnect };

  Kind kind = Kind::disconnect;
  std::string name;  // command or event name
  int code = 0;      // exit code, 0..255

  static Trigger command(std::string name);
  static Trigger exit(int code);
  static Trigger event(std::string name);
  static Trigger disconnect();

  std::string describe() const;
  bool operator==(const Trigger&) const = default;
};

/// The left-hand side of a rule; exit patterns may match a code, any
/// non-zero code, or any code.
struct TriggerPattern {
  enum class ExitMatch { code, nonzero, any };

  Trigger::Kind kind = Trigger::Kind::disconnect;
  std::string name;
  ExitMatch exit_match = ExitMatch::code;
  int code = 0;

  bool matches(const Trigger& trigger) const;
  std::string describe() const;
  bool operator==(const TriggerPattern&) const = default;
};

struct TransitionRule {
  std::optional<std::string> from;  // nullopt is the '*' wildcard
  TriggerPattern trigger;
  std::vector<Action> actions;
  std::string to;
  int line = 0;  // source line, not part of identity

  bool operator==(const TransitionRule& other) const {
    return from == other.from && trigger == other.trigger &&
           actions == other.actions && to == other.to;
  }
};

struct MachineSpec {
  std::string name;
  std::vector<StateDescriptor> states;
  std::vector<TransitionRule> rules;

  const StateDescriptor* find_state(std::string_view state) const;
  const StateDescriptor& initial() const;
  /// First declared error-class state, used when a child exit matches no rule.
  const StateDescriptor* first_error_state() const;

  bool operator==(const MachineSpec&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  enum class Kind {
    syntax,
    duplicate_state,
    no_initial_ready,
    undeclared_target_state,
    duplicate_exact_rule,
  };

  ParseError(Kind kind, int line, const std::string& what);

  Kind kind() const { return kind_; }
  int line() const { return line_; }

 private:
  Kind kind_;
  int line_;
};

/// Parses and validates spec-file text. Throws ParseError.
MachineSpec parse_spec(std::string_view text);
MachineSpec load_spec_file(const std::string& path);

/// Canonical text form; parse_spec(print_spec(s)) == s.
std::string print_spec(const MachineSpec& spec);

/// States not reachable from READY through any rule. A warning, not an error.
std::vector<std::string> unreachable_states(const MachineSpec& spec);

enum class ReportDecision { report_major, report_minor, suppress };

std::string_view to_string(ReportDecision decision);
ReportDecision report_decision(const MachineSpec& spec, std::string_view state);

}  // namespace mnsm::machine
