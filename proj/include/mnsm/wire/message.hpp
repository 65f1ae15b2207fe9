// SPDX-License-Identifier: Apache-2.0
//
// Newline-delimited JSON frames exchanged between the registry, the manager,
// the node daemons and controllers.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace mnsm::wire {

enum class MessageType {
  REGISTER,
  LOOKUP,
  LOOKUP_REPLY,
  LIST,
  LIST_REPLY,
  COMMAND,
  STATE_REPORT,
  HEARTBEAT,
  BYE,
};

std::string_view to_string(MessageType type);
std::optional<MessageType> parse_message_type(std::string_view text);

/// One frame. Everything except type/sender/seq lives in `payload`, which
/// also carries unknown fields through a decode/encode cycle untouched.
struct WireMessage {
  MessageType type = MessageType::HEARTBEAT;
  std::string sender;
  std::uint64_t seq = 0;
  nlohmann::json payload = nlohmann::json::object();

  bool operator==(const WireMessage&) const = default;

  std::string str(std::string_view key) const;
  std::int64_t integer(std::string_view key) const;
  bool has(std::string_view key) const { return payload.contains(key); }
};

class DecodeError : public std::runtime_error {
 public:
  enum class Kind { malformed_frame, unknown_type, missing_required_field };

  DecodeError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Encodes to a single line including the trailing '\n'. Throws
/// std::invalid_argument if a required field is missing.
std::string encode_message(const WireMessage& msg);

/// Decodes one line (with or without trailing newline). Throws DecodeError.
WireMessage decode_message(std::string_view line);

/// Reserved COMMAND names for reading a node's log through its daemon.
inline constexpr std::string_view kLogRequest = "__log";
inline constexpr std::string_view kLogReply = "__log_reply";

// Builders for the common frames.
WireMessage make_register(std::string sender, std::string kind, std::string host,
                          int port);
WireMessage make_lookup(std::string sender, std::string name);
WireMessage make_list(std::string sender, std::optional<std::string> kind);
WireMessage make_command(std::string sender, std::string name);
WireMessage make_state_report(std::string sender, std::string state,
                              std::string cls, std::string color,
                              std::string detail = {});
WireMessage make_heartbeat(std::string sender);
WireMessage make_bye(std::string sender);

}  // namespace mnsm::wire
