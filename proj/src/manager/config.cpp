// SPDX-License-Identifier: Apache-2.0

#include "mnsm/manager/config.hpp"

#include <charconv>
#include <stdexcept>
#include <string>

namespace mnsm::manager {

std::chrono::milliseconds parse_duration(std::string_view text) {
  std::int64_t value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr == first || value < 0) {
    throw std::invalid_argument("bad duration '" + std::string(text) + "'");
  }
  std::string_view unit(ptr, static_cast<std::size_t>(last - ptr));
  std::int64_t scale = 0;
  if (unit.empty() || unit == "ms") scale = 1;
  else if (unit == "s") scale = 1000;
  else if (unit == "m") scale = 60000;
  else throw std::invalid_argument("bad duration unit '" + std::string(unit) + "'");
  if (value > INT64_MAX / scale) throw std::invalid_argument("duration out of range");
  return std::chrono::milliseconds(value * scale);
}

}  // namespace mnsm::manager
