// SPDX-License-Identifier: Apache-2.0

#include "mnsm/core/types.hpp"

#include <algorithm>

namespace mnsm::core {

std::string_view to_string(ReportClass cls) {
  switch (cls) {
    case ReportClass::major: return "major";
    case ReportClass::minor: return "minor";
    case ReportClass::micro: return "micro";
    case ReportClass::error: return "error";
  }
  return "major";
}

std::optional<ReportClass> parse_report_class(std::string_view text) {
  if (text == "major") return ReportClass::major;
  if (text == "minor") return ReportClass::minor;
  if (text == "micro") return ReportClass::micro;
  if (text == "error") return ReportClass::error;
  return std::nullopt;
}

std::vector<std::string> ManagerConfig::validate() const {
  std::vector<std::string> reasons;
  if (min_nodes < 1) reasons.push_back("min_nodes: must be at least 1");
  if (max_nodes < 1) reasons.push_back("max_nodes: must be at least 1");
  if (min_nodes > max_nodes) reasons.push_back("min_nodes: must not exceed max_nodes");
  if (max_errors < 0) reasons.push_back("max_errors: must not be negative");
  if (timeout <= Duration::zero()) reasons.push_back("timeout: must be positive");
  return reasons;
}

std::string_view phase_name(const Phase& phase) {
  struct Namer {
    std::string_view operator()(const Coherent&) const { return "coherent"; }
    std::string_view operator()(const InTransition&) const { return "in_transition"; }
    std::string_view operator()(const Resetting&) const { return "resetting"; }
    std::string_view operator()(const Errored&) const { return "errored"; }
  };
  return std::visit(Namer{}, phase);
}

std::string_view to_string(TimerKind kind) {
  return kind == TimerKind::transition ? "transition" : "command";
}

std::optional<TimerKind> parse_timer_kind(std::string_view text) {
  if (text == "transition") return TimerKind::transition;
  if (text == "command") return TimerKind::command;
  return std::nullopt;
}

std::string_view to_string(OperatorActionKind kind) {
  switch (kind) {
    case OperatorActionKind::kill: return "kill";
    case OperatorActionKind::restart: return "restart";
    case OperatorActionKind::clear_unavailable: return "clear-unavailable";
  }
  return "kill";
}

std::optional<OperatorActionKind> parse_operator_action(std::string_view text) {
  if (text == "kill") return OperatorActionKind::kill;
  if (text == "restart") return OperatorActionKind::restart;
  if (text == "clear-unavailable") return OperatorActionKind::clear_unavailable;
  return std::nullopt;
}

std::size_t ManagerState::active_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes.begin(), nodes.end(), [](const auto& kv) { return kv.second.active; }));
}

NodeTile make_tile(const NodeRecord& node) {
  NodeTile tile;
  tile.name = node.name;
  if (node.last_display) {
    tile.state = node.last_display->state;
    tile.cls = std::string(to_string(node.last_display->cls));
    tile.color = node.last_display->color;
    tile.detail = node.last_display->detail;
  }
  tile.connected = node.connected;
  tile.active = node.active;
  tile.available = node.available();
  tile.dead = node.dead;
  tile.unavailable = node.unavailable;
  return tile;
}

Summary make_summary(const ManagerState& state) {
  return Summary{state.aggregate, std::string(phase_name(state.phase)), state.last_action,
                 state.error_count};
}

}  // namespace mnsm::core
