// SPDX-License-Identifier: Apache-2.0

#include "mnsm/sim/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mnsm/core/codec.hpp"

namespace mnsm::sim {

using nlohmann::json;

namespace {

Tick read_tick(const json& j, const char* key, Tick fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<Tick>() < 0) {
    throw ScenarioError(where + ": " + key + " must be a non-negative integer");
  }
  return v.get<Tick>();
}

std::string read_string(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_string() || j.at(key).get<std::string>().empty()) {
    throw ScenarioError(where + ": " + key + " must be a non-empty string");
  }
  return j.at(key).get<std::string>();
}

NodeStep parse_step(const json& j, bool has_machine, const std::string& where) {
  if (!j.is_object()) throw ScenarioError(where + ": expected an object");
  NodeStep s;
  if (j.contains("on")) s.on = read_string(j, "on", where);
  s.delay = read_tick(j, "delay", 0, where);
  auto action = read_string(j, "action", where);
  if (action == "report") {
    s.action = NodeStep::Action::report;
    s.state = read_string(j, "state", where);
    auto cls = core::parse_report_class(j.value("class", "major"));
    if (!cls) throw ScenarioError(where + ": unknown class");
    s.cls = *cls;
    s.color = j.value("color", "");
    s.detail = j.value("detail", "");
  } else if (action == "event") {
    s.action = NodeStep::Action::event;
    s.event = read_string(j, "event", where);
  } else if (action == "exit") {
    s.action = NodeStep::Action::exit;
    s.code = j.value("code", 0);
    if (s.code < 0 || s.code > 255) throw ScenarioError(where + ": exit code out of range");
  } else if (action == "disconnect") {
    s.action = NodeStep::Action::disconnect;
  } else if (action == "reconnect") {
    s.action = NodeStep::Action::reconnect;
    s.state = j.value("state", "");
  } else if (action == "ignore-command") {
    s.action = NodeStep::Action::ignore_command;
  } else {
    throw ScenarioError(where + ": unknown action '" + action + "'");
  }
  if (!has_machine && (s.action == NodeStep::Action::event || s.action == NodeStep::Action::exit)) {
    throw ScenarioError(where + ": '" + action + "' needs a machine");
  }
  return s;
}

std::vector<NodeStep> parse_script(const json& j, bool has_machine, const std::string& where) {
  std::vector<NodeStep> steps;
  if (!j.is_array()) throw ScenarioError(where + ": script must be an array");
  for (std::size_t i = 0; i < j.size(); ++i) {
    steps.push_back(parse_step(j[i], has_machine, where + "[" + std::to_string(i) + "]"));
  }
  return steps;
}

ControllerStep parse_controller_step(const json& j, const std::string& where) {
  if (!j.is_object()) throw ScenarioError(where + ": expected an object");
  ControllerStep s;
  if (j.contains("await")) s.await = read_string(j, "await", where);
  s.delay = read_tick(j, "delay", 0, where);
  if (j.contains("command")) {
    s.kind = ControllerStep::Kind::command;
    s.command = read_string(j, "command", where);
  } else if (j.contains("operator")) {
    s.kind = ControllerStep::Kind::operator_action;
    auto op = core::parse_operator_action(read_string(j, "operator", where));
    if (!op) throw ScenarioError(where + ": unknown operator action");
    s.op = *op;
    s.node = read_string(j, "node", where);
  } else if (j.contains("config")) {
    s.kind = ControllerStep::Kind::config;
    try {
      s.config = core::config_from_json(j.at("config"));
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(where + ": " + e.what());
    }
  } else {
    throw ScenarioError(where + ": needs command, operator or config");
  }
  return s;
}

}  // namespace

Scenario scenario_from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ScenarioError("scenario: expected an object");
  Scenario sc;
  sc.name = j.value("name", "unnamed");

  if (j.contains("machine")) {
    std::filesystem::path p = read_string(j, "machine", "scenario");
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    try {
      sc.machine = std::make_shared<const machine::MachineSpec>(machine::load_spec_file(p.string()));
    } catch (const std::exception& e) {
      throw ScenarioError("machine " + p.string() + ": " + e.what());
    }
  }

  if (j.contains("config")) {
    try {
      sc.config = core::config_from_json(j.at("config"));
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(std::string("config: ") + e.what());
    }
  }
  if (auto reasons = sc.config.validate(); !reasons.empty()) {
    throw ScenarioError("config: " + reasons.front());
  }

  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ScenarioError("seed must be a non-negative integer");
    sc.seed = j.at("seed").get<std::uint64_t>();
  }
  sc.latency = read_tick(j, "latency", 0, "scenario");
  sc.jitter = read_tick(j, "jitter", 0, "scenario");
  sc.reset_delay = read_tick(j, "reset_delay", 1, "scenario");
  sc.max_time = read_tick(j, "max_time", sc.max_time, "scenario");

  const bool has_machine = sc.machine != nullptr;
  std::vector<NodeStep> default_script;
  if (j.contains("default_script")) {
    default_script = parse_script(j.at("default_script"), has_machine, "default_script");
  }

  if (!j.contains("nodes")) throw ScenarioError("scenario: nodes missing");
  const auto& nodes = j.at("nodes");
  if (nodes.is_object()) {
    int count = nodes.value("count", 0);
    if (count < 1) throw ScenarioError("nodes: count must be positive");
    auto prefix = nodes.value("prefix", std::string("node-"));
    const auto width = std::to_string(count).size();
    for (int i = 1; i <= count; ++i) {
      auto digits = std::to_string(i);
      sc.nodes.push_back(
          NodeScript{prefix + std::string(width - digits.size(), '0') + digits, default_script});
    }
  } else if (nodes.is_array()) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto& n = nodes[i];
      const std::string where = "nodes[" + std::to_string(i) + "]";
      if (n.is_string()) {
        sc.nodes.push_back(NodeScript{n.get<std::string>(), default_script});
        continue;
      }
      NodeScript script{read_string(n, "name", where), default_script};
      if (n.contains("script")) script.steps = parse_script(n.at("script"), has_machine, where);
      sc.nodes.push_back(std::move(script));
    }
  } else {
    throw ScenarioError("nodes: expected a list or {count, prefix}");
  }
  std::set<std::string> seen;
  for (const auto& n : sc.nodes) {
    if (n.name.empty() || !seen.insert(n.name).second) {
      throw ScenarioError("nodes: duplicate or empty name '" + n.name + "'");
    }
  }

  if (j.contains("controller")) {
    const auto& steps = j.at("controller");
    if (!steps.is_array()) throw ScenarioError("controller: expected an array");
    for (std::size_t i = 0; i < steps.size(); ++i) {
      sc.controller.push_back(parse_controller_step(steps[i], "controller[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("expect")) sc.expect_published = j.at("expect").get<std::vector<std::string>>();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError(path + ": " + e.what());
  }
  auto base = std::filesystem::path(path).parent_path().string();
  return scenario_from_json(j, base.empty() ? "." : base);
}

}  // namespace mnsm::sim
