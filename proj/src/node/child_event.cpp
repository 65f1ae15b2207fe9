// SPDX-License-Identifier: Apache-2.0

#include "mnsm/node/child_event.hpp"

namespace mnsm::node {

std::optional<std::string> parse_child_event(std::string_view line) {
  constexpr std::string_view kPrefix = "EVENT ";
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (line.substr(0, kPrefix.size()) != kPrefix) return std::nullopt;
  auto name = line.substr(kPrefix.size());
  if (name.empty()) return std::nullopt;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '.' || c == '-';
    if (!ok) return std::nullopt;
  }
  return std::string(name);
}

}  // namespace mnsm::node
