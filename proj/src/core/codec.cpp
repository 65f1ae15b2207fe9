// SPDX-License-Identifier: Apache-2.0

#include "mnsm/core/codec.hpp"

#include <stdexcept>

namespace mnsm::core {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string need_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw std::invalid_argument(std::string(key) + ": expected a string");
  }
  return it->get<std::string>();
}

std::uint64_t need_unsigned(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer() ||
      (!it->is_number_unsigned() && it->get<std::int64_t>() < 0)) {
    throw std::invalid_argument(std::string(key) + ": expected a non-negative integer");
  }
  return it->get<std::uint64_t>();
}

TimerKind need_timer_kind(const json& j) {
  auto kind = parse_timer_kind(need_string(j, "kind"));
  if (!kind) throw std::invalid_argument("kind: unknown timer kind");
  return *kind;
}

}  // namespace

json to_json(const ManagerConfig& c) {
  return json{{"min_nodes", c.min_nodes},
              {"max_nodes", c.max_nodes},
              {"max_errors", c.max_errors},
              {"timeout_ms", c.timeout.count()}};
}

ManagerConfig config_from_json(const json& j, const ManagerConfig& base) {
  if (!j.is_object()) throw std::invalid_argument("config: expected an object");
  ManagerConfig c = base;
  auto int_field = [&](const char* key, int& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    if (!it->is_number_integer()) throw std::invalid_argument(std::string(key) + ": expected an integer");
    out = it->get<int>();
  };
  int_field("min_nodes", c.min_nodes);
  int_field("max_nodes", c.max_nodes);
  int_field("max_errors", c.max_errors);
  if (auto it = j.find("timeout_ms"); it != j.end()) {
    if (!it->is_number_integer()) throw std::invalid_argument("timeout_ms: expected an integer");
    c.timeout = Duration(it->get<std::int64_t>());
  }
  return c;
}

json to_json(const ManagerEvent& event) {
  return std::visit(
      Overloaded{
          [](const NodeConnected& e) { return json{{"type", "connect"}, {"node", e.node}}; },
          [](const NodeDisconnected& e) { return json{{"type", "disconnect"}, {"node", e.node}}; },
          [](const Report& e) {
            return json{{"type", "report"},       {"node", e.node},   {"state", e.state},
                        {"class", to_string(e.cls)}, {"color", e.color}, {"detail", e.detail}};
          },
          [](const ControllerCommand& e) { return json{{"type", "command"}, {"name", e.name}}; },
          [](const OperatorAction& e) {
            return json{{"type", "operator"}, {"action", to_string(e.kind)}, {"node", e.node}};
          },
          [](const TimerFired& e) {
            return json{{"type", "timer"}, {"kind", to_string(e.kind)}, {"generation", e.generation}};
          },
          [](const ConfigChange& e) { return json{{"type", "config"}, {"config", to_json(e.config)}}; },
      },
      event);
}

ManagerEvent event_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("event: expected an object");
  auto type = need_string(j, "type");
  if (type == "connect") return NodeConnected{need_string(j, "node")};
  if (type == "disconnect") return NodeDisconnected{need_string(j, "node")};
  if (type == "report") {
    auto cls = parse_report_class(need_string(j, "class"));
    if (!cls) throw std::invalid_argument("class: unknown report class");
    return Report{need_string(j, "node"), need_string(j, "state"), *cls,
                  j.value("color", std::string()), j.value("detail", std::string())};
  }
  if (type == "command") return ControllerCommand{need_string(j, "name")};
  if (type == "operator") {
    auto kind = parse_operator_action(need_string(j, "action"));
    if (!kind) throw std::invalid_argument("action: unknown operator action");
    return OperatorAction{*kind, need_string(j, "node")};
  }
  if (type == "timer") return TimerFired{need_timer_kind(j), need_unsigned(j, "generation")};
  if (type == "config") {
    if (!j.contains("config")) throw std::invalid_argument("config: missing");
    return ConfigChange{config_from_json(j.at("config"))};
  }
  throw std::invalid_argument("type: unknown event type '" + type + "'");
}

json to_json(const NodeTile& t) {
  return json{{"name", t.name},
              {"state", t.state},
              {"class", t.cls},
              {"color", t.color},
              {"detail", t.detail},
              {"connected", t.connected},
              {"active", t.active},
              {"available", t.available},
              {"dead", t.dead},
              {"unavailable", t.unavailable}};
}

json to_json(const Summary& s) {
  return json{{"aggregate", s.aggregate},
              {"phase", s.phase},
              {"last_action", s.last_action},
              {"error_count", s.error_count}};
}

json to_json(const Effect& effect) {
  return std::visit(
      Overloaded{
          [](const SendToNode& e) {
            return json{{"effect", "send"}, {"node", e.node}, {"command", e.command}};
          },
          [](const SetTimer& e) {
            return json{{"effect", "set_timer"},
                        {"kind", to_string(e.kind)},
                        {"timeout_ms", e.timeout.count()},
                        {"generation", e.generation}};
          },
          [](const CancelTimer& e) {
            return json{{"effect", "cancel_timer"},
                        {"kind", to_string(e.kind)},
                        {"generation", e.generation}};
          },
          [](const PublishAggregate& e) { return json{{"effect", "publish"}, {"state", e.state}}; },
          [](const Display& e) {
            if (auto* tile = std::get_if<NodeTile>(&e.update)) {
              return json{{"effect", "display"}, {"tile", to_json(*tile)}};
            }
            return json{{"effect", "display"}, {"summary", to_json(std::get<Summary>(e.update))}};
          },
          [](const Log& e) { return json{{"effect", "log"}, {"line", e.line}}; },
      },
      effect);
}

Effect effect_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("effect: expected an object");
  auto kind = need_string(j, "effect");
  if (kind == "send") return SendToNode{need_string(j, "node"), need_string(j, "command")};
  if (kind == "set_timer") {
    return SetTimer{need_timer_kind(j), Duration(need_unsigned(j, "timeout_ms")),
                    need_unsigned(j, "generation")};
  }
  if (kind == "cancel_timer") return CancelTimer{need_timer_kind(j), need_unsigned(j, "generation")};
  if (kind == "publish") return PublishAggregate{need_string(j, "state")};
  if (kind == "log") return Log{need_string(j, "line")};
  if (kind == "display") {
    if (auto it = j.find("tile"); it != j.end()) {
      const auto& t = *it;
      NodeTile tile{need_string(t, "name"), need_string(t, "state"), need_string(t, "class"),
                    need_string(t, "color"), need_string(t, "detail")};
      tile.connected = t.value("connected", false);
      tile.active = t.value("active", false);
      tile.available = t.value("available", false);
      tile.dead = t.value("dead", false);
      tile.unavailable = t.value("unavailable", false);
      return Display{tile};
    }
    if (auto it = j.find("summary"); it != j.end()) {
      const auto& s = *it;
      return Display{Summary{need_string(s, "aggregate"), need_string(s, "phase"),
                             need_string(s, "last_action"), s.value("error_count", 0)}};
    }
    throw std::invalid_argument("display: needs tile or summary");
  }
  throw std::invalid_argument("effect: unknown effect '" + kind + "'");
}

json effects_to_json(const Effects& effects) {
  json out = json::array();
  for (const auto& e : effects) out.push_back(to_json(e));
  return out;
}

}  // namespace mnsm::core
