// SPDX-License-Identifier: Apache-2.0
//
// Vocabulary of the aggregation core: configuration, per-node ledger,
// manager state, input events and output effects. The core knows exactly
// two state names of its own, READY and ERROR; every other state name it
// ever holds came from a daemon report.

#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mnsm::core {

using Duration = std::chrono::milliseconds;

inline constexpr std::string_view kReady = "READY";
inline constexpr std::string_view kError = "ERROR";
inline constexpr std::string_view kStart = "START";
inline constexpr std::string_view kReset = "RESET";

enum class ReportClass { major, minor, micro, error };

std::string_view to_string(ReportClass cls);
std::optional<ReportClass> parse_report_class(std::string_view text);

struct ManagerConfig {
  int min_nodes = 1;
  int max_nodes = 1000;
  int max_errors = 0;
  Duration timeout{30000};

  /// Field-level reasons; empty when valid.
  std::vector<std::string> validate() const;
  bool operator==(const ManagerConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Ledger

struct DisplayState {
  std::string state;
  ReportClass cls = ReportClass::major;
  std::string color;
  std::string detail;

  bool operator==(const DisplayState&) const = default;
};

struct NodeRecord {
  std::string name;
  bool connected = false;
  bool active = false;
  bool dead = false;
  bool unavailable = false;
  /// Most recently consumed major state. Cleared when START activates the
  /// node, so "last_major == READY" never coexists with "active".
  std::optional<std::string> last_major;
  std::optional<DisplayState> last_display;
  /// Major reports received but not yet consumed by the coherence check.
  std::deque<std::string> pending;

  /// Eligible for selection at START.
  bool available() const {
    return connected && !unavailable && !active && last_major == kReady;
  }
  bool operator==(const NodeRecord&) const = default;
};

struct Coherent {
  bool operator==(const Coherent&) const = default;
};
struct InTransition {
  std::string target;
  std::set<std::string> done;
  bool operator==(const InTransition&) const = default;
};
struct Resetting {
  std::set<std::string> awaiting;
  bool operator==(const Resetting&) const = default;
};
struct Errored {
  bool operator==(const Errored&) const = default;
};
using Phase = std::variant<Coherent, InTransition, Resetting, Errored>;

std::string_view phase_name(const Phase& phase);

enum class TimerKind { transition, command };

std::string_view to_string(TimerKind kind);
std::optional<TimerKind> parse_timer_kind(std::string_view text);

struct ArmedTimer {
  TimerKind kind = TimerKind::command;
  std::uint64_t generation = 0;
  bool operator==(const ArmedTimer&) const = default;
};

struct ManagerState {
  std::string aggregate{kReady};
  /// Aggregate held before ERROR; restored when RESET lifts the latch.
  std::string pre_error_aggregate{kReady};
  Phase phase = Coherent{};
  std::map<std::string, NodeRecord> nodes;
  int error_count = 0;
  std::optional<ArmedTimer> timer;
  std::uint64_t timer_generation = 0;
  std::string last_action;
  ManagerConfig config;       // in force for the current epoch
  ManagerConfig next_config;  // applied at the next START or RESET

  std::size_t active_count() const;
  bool operator==(const ManagerState&) const = default;
};

// ---------------------------------------------------------------------------
// Events

struct NodeConnected {
  std::string node;
  bool operator==(const NodeConnected&) const = default;
};
struct NodeDisconnected {
  std::string node;
  bool operator==(const NodeDisconnected&) const = default;
};
struct Report {
  std::string node;
  std::string state;
  ReportClass cls = ReportClass::major;
  std::string color;
  std::string detail;
  bool operator==(const Report&) const = default;
};
struct ControllerCommand {
  std::string name;
  bool operator==(const ControllerCommand&) const = default;
};

enum class OperatorActionKind { kill, restart, clear_unavailable };

std::string_view to_string(OperatorActionKind kind);
std::optional<OperatorActionKind> parse_operator_action(std::string_view text);

struct OperatorAction {
  OperatorActionKind kind = OperatorActionKind::kill;
  std::string node;
  bool operator==(const OperatorAction&) const = default;
};
struct TimerFired {
  TimerKind kind = TimerKind::command;
  std::uint64_t generation = 0;
  bool operator==(const TimerFired&) const = default;
};
struct ConfigChange {
  ManagerConfig config;
  bool operator==(const ConfigChange&) const = default;
};

using ManagerEvent = std::variant<NodeConnected, NodeDisconnected, Report, ControllerCommand,
                                  OperatorAction, TimerFired, ConfigChange>;

// ---------------------------------------------------------------------------
// Effects

struct SendToNode {
  std::string node;
  std::string command;
  bool operator==(const SendToNode&) const = default;
};
struct SetTimer {
  TimerKind kind = TimerKind::command;
  Duration timeout{0};
  std::uint64_t generation = 0;
  bool operator==(const SetTimer&) const = default;
};
struct CancelTimer {
  TimerKind kind = TimerKind::command;
  std::uint64_t generation = 0;
  bool operator==(const CancelTimer&) const = default;
};
struct PublishAggregate {
  std::string state;
  bool operator==(const PublishAggregate&) const = default;
};

/// One button in the operator display.
struct NodeTile {
  std::string name;
  std::string state;
  std::string cls;
  std::string color;
  std::string detail;
  bool connected = false;
  bool active = false;
  bool available = false;
  bool dead = false;
  bool unavailable = false;
  bool operator==(const NodeTile&) const = default;
};

struct Summary {
  std::string aggregate;
  std::string phase;
  std::string last_action;
  int error_count = 0;
  bool operator==(const Summary&) const = default;
};

struct Display {
  std::variant<NodeTile, Summary> update;
  bool operator==(const Display&) const = default;
};
struct Log {
  std::string line;
  bool operator==(const Log&) const = default;
};

using Effect = std::variant<SendToNode, SetTimer, CancelTimer, PublishAggregate, Display, Log>;
using Effects = std::vector<Effect>;

NodeTile make_tile(const NodeRecord& node);
Summary make_summary(const ManagerState& state);

}  // namespace mnsm::core
