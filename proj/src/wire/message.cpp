// SPDX-License-Identifier: Apache-2.0

#include "mnsm/wire/message.hpp"

#include <array>
#include <utility>

namespace mnsm::wire {
namespace {

using json = nlohmann::json;

struct FieldRule {
  const char* name;
  json::value_t type;  // string, boolean, number_integer (any integer), array
};

bool type_ok(const json& v, json::value_t want) {
  switch (want) {
    case json::value_t::string: return v.is_string();
    case json::value_t::boolean: return v.is_boolean();
    case json::value_t::number_integer: return v.is_number_integer();
    case json::value_t::array: return v.is_array();
    default: return true;
  }
}

std::vector<FieldRule> required_fields(MessageType type) {
  using V = json::value_t;
  switch (type) {
    case MessageType::REGISTER:
      return {{"kind", V::string}, {"host", V::string}, {"port", V::number_integer}};
    case MessageType::LOOKUP: return {{"name", V::string}};
    case MessageType::LOOKUP_REPLY: return {{"name", V::string}, {"found", V::boolean}};
    case MessageType::LIST: return {};
    case MessageType::LIST_REPLY: return {{"records", V::array}};
    case MessageType::COMMAND: return {{"name", V::string}};
    case MessageType::STATE_REPORT:
      return {{"state", V::string}, {"class", V::string}, {"color", V::string}};
    case MessageType::HEARTBEAT:
    case MessageType::BYE:
      return {};
  }
  return {};
}

constexpr std::array<std::pair<MessageType, std::string_view>, 9> kTypeNames{{
    {MessageType::REGISTER, "REGISTER"},
    {MessageType::LOOKUP, "LOOKUP"},
    {MessageType::LOOKUP_REPLY, "LOOKUP_REPLY"},
    {MessageType::LIST, "LIST"},
    {MessageType::LIST_REPLY, "LIST_REPLY"},
    {MessageType::COMMAND, "COMMAND"},
    {MessageType::STATE_REPORT, "STATE_REPORT"},
    {MessageType::HEARTBEAT, "HEARTBEAT"},
    {MessageType::BYE, "BYE"},
}};

}  // namespace

std::string_view to_string(MessageType type) {
  for (const auto& [t, name] : kTypeNames) {
    if (t == type) return name;
  }
  return "HEARTBEAT";
}

std::optional<MessageType> parse_message_type(std::string_view text) {
  for (const auto& [t, name] : kTypeNames) {
    if (name == text) return t;
  }
  return std::nullopt;
}

std::string WireMessage::str(std::string_view key) const {
  auto it = payload.find(key);
  if (it == payload.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

std::int64_t WireMessage::integer(std::string_view key) const {
  auto it = payload.find(key);
  if (it == payload.end() || !it->is_number_integer()) return 0;
  return it->get<std::int64_t>();
}

std::string encode_message(const WireMessage& msg) {
  if (!msg.payload.is_object()) throw std::invalid_argument("payload must be an object");
  for (const auto* reserved : {"type", "sender", "seq"}) {
    if (msg.payload.contains(reserved)) {
      throw std::invalid_argument(std::string("payload may not carry '") + reserved + "'");
    }
  }
  for (const auto& rule : required_fields(msg.type)) {
    auto it = msg.payload.find(rule.name);
    if (it == msg.payload.end() || !type_ok(*it, rule.type)) {
      throw std::invalid_argument(std::string(to_string(msg.type)) + " requires field '" +
                                  rule.name + "'");
    }
  }
  json j = msg.payload;
  j["type"] = to_string(msg.type);
  j["sender"] = msg.sender;
  j["seq"] = msg.seq;
  try {
    return j.dump() + "\n";
  } catch (const json::exception& e) {
    throw std::invalid_argument(e.what());
  }
}

WireMessage decode_message(std::string_view line) {
  using Kind = DecodeError::Kind;
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (line.find('\n') != std::string_view::npos) {
    throw DecodeError(Kind::malformed_frame, "embedded newline in frame");
  }

  json j = json::parse(line.begin(), line.end(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw DecodeError(Kind::malformed_frame, "frame is not valid JSON");
  if (!j.is_object()) throw DecodeError(Kind::malformed_frame, "frame is not an object");

  auto take = [&](const char* key) -> json {
    auto it = j.find(key);
    if (it == j.end()) {
      throw DecodeError(Kind::missing_required_field, std::string("missing '") + key + "'");
    }
    json v = std::move(*it);
    j.erase(it);
    return v;
  };

  json type = take("type");
  if (!type.is_string()) throw DecodeError(Kind::malformed_frame, "'type' is not a string");
  auto parsed = parse_message_type(type.get<std::string>());
  if (!parsed) {
    throw DecodeError(Kind::unknown_type, "unknown type '" + type.get<std::string>() + "'");
  }

  json sender = take("sender");
  if (!sender.is_string()) throw DecodeError(Kind::malformed_frame, "'sender' is not a string");
  json seq = take("seq");
  if (!seq.is_number_unsigned()) {
    throw DecodeError(Kind::malformed_frame, "'seq' is not a non-negative integer");
  }

  WireMessage msg;
  msg.type = *parsed;
  msg.sender = sender.get<std::string>();
  msg.seq = seq.get<std::uint64_t>();
  for (const auto& rule : required_fields(msg.type)) {
    auto it = j.find(rule.name);
    if (it == j.end()) {
      throw DecodeError(Kind::missing_required_field,
                        std::string(to_string(msg.type)) + " missing '" + rule.name + "'");
    }
    if (!type_ok(*it, rule.type)) {
      throw DecodeError(Kind::malformed_frame,
                        std::string("field '") + rule.name + "' has the wrong type");
    }
  }
  msg.payload = std::move(j);
  return msg;
}

WireMessage make_register(std::string sender, std::string kind, std::string host,
                          int port) {
  WireMessage m{MessageType::REGISTER, std::move(sender), 0, json::object()};
  m.payload["kind"] = std::move(kind);
  m.payload["host"] = std::move(host);
  m.payload["port"] = port;
  return m;
}

WireMessage make_lookup(std::string sender, std::string name) {
  WireMessage m{MessageType::LOOKUP, std::move(sender), 0, json::object()};
  m.payload["name"] = std::move(name);
  return m;
}

WireMessage make_list(std::string sender, std::optional<std::string> kind) {
  WireMessage m{MessageType::LIST, std::move(sender), 0, json::object()};
  if (kind) m.payload["kind"] = std::move(*kind);
  return m;
}

WireMessage make_command(std::string sender, std::string name) {
  WireMessage m{MessageType::COMMAND, std::move(sender), 0, json::object()};
  m.payload["name"] = std::move(name);
  return m;
}

WireMessage make_state_report(std::string sender, std::string state, std::string cls,
                              std::string color, std::string detail) {
  WireMessage m{MessageType::STATE_REPORT, std::move(sender), 0, json::object()};
  m.payload["state"] = std::move(state);
  m.payload["class"] = std::move(cls);
  m.payload["color"] = std::move(color);
  m.payload["detail"] = std::move(detail);
  return m;
}

WireMessage make_heartbeat(std::string sender) {
  return WireMessage{MessageType::HEARTBEAT, std::move(sender), 0, json::object()};
}

WireMessage make_bye(std::string sender) {
  return WireMessage{MessageType::BYE, std::move(sender), 0, json::object()};
}

}  // namespace mnsm::wire
