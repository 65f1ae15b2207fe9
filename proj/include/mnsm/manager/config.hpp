// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <string_view>

namespace mnsm::manager {

/// Parses "250ms", "30s", "2m" or a bare millisecond count. Throws
/// std::invalid_argument.
std::chrono::milliseconds parse_duration(std::string_view text);

}  // namespace mnsm::manager
