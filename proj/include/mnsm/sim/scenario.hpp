// SPDX-License-Identifier: Apache-2.0
//
// Scripted node and controller behaviour for the virtual-time runner.
// Durations are integer ticks; one tick is one virtual millisecond, so a
// config timeout of 5000 ms is 5000 ticks.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mnsm/core/types.hpp"
#include "mnsm/machine/spec.hpp"

namespace mnsm::sim {

using Tick = std::int64_t;

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NodeStep {
  enum class Action { report, event, exit, disconnect, reconnect, ignore_command };

  /// Wait for this command to reach the node before the delay starts.
  std::optional<std::string> on;
  Tick delay = 0;
  Action action = Action::report;
  std::string state;  // report, or reconnect override
  core::ReportClass cls = core::ReportClass::major;
  std::string color;
  std::string detail;
  std::string event;  // event
  int code = 0;       // exit
};

struct NodeScript {
  std::string name;
  std::vector<NodeStep> steps;
};

struct ControllerStep {
  enum class Kind { command, operator_action, config };

  /// Wait until this aggregate is current before the delay starts.
  std::optional<std::string> await;
  Tick delay = 0;
  Kind kind = Kind::command;
  std::string command;
  core::OperatorActionKind op = core::OperatorActionKind::kill;
  std::string node;
  core::ManagerConfig config;
};

struct Scenario {
  std::string name;
  /// Nodes run this machine when set; otherwise they follow their scripts
  /// literally and answer RESET with READY after reset_delay.
  std::shared_ptr<const machine::MachineSpec> machine;
  core::ManagerConfig config;
  std::vector<NodeScript> nodes;
  std::vector<ControllerStep> controller;
  /// Set: randomised tie-breaking and delivery jitter derived from it.
  std::optional<std::uint64_t> seed;
  Tick latency = 0;
  Tick jitter = 0;
  Tick reset_delay = 1;
  Tick max_time = 3'600'000;
  std::optional<std::vector<std::string>> expect_published;
};

/// `base_dir` resolves a relative "machine" path.
Scenario scenario_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

}  // namespace mnsm::sim
