// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <cstdlib>

#include "mnsm/wire/socket.hpp"

namespace mnsm::wire {

Endpoint Endpoint::parse(std::string_view text) {
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size()) {
    throw std::invalid_argument("expected host:port, got '" + std::string(text) + "'");
  }
  Endpoint ep;
  ep.host = std::string(text.substr(0, colon));
  auto digits = text.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), ep.port);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || ep.port <= 0 ||
      ep.port > 65535) {
    throw std::invalid_argument("bad port in '" + std::string(text) + "'");
  }
  return ep;
}

Endpoint registry_endpoint(std::optional<std::string> flag) {
  if (const char* env = std::getenv("MNSM_REGISTRY"); env && *env) {
    return Endpoint::parse(env);
  }
  if (flag && !flag->empty()) return Endpoint::parse(*flag);
  return Endpoint{"127.0.0.1", kDefaultRegistryPort};
}

}  // namespace mnsm::wire
