// SPDX-License-Identifier: Apache-2.0
//
// The child -> daemon event framing on the child's output pipe.

#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace mnsm::node {

/// "EVENT <name>" (one space, name of [A-Za-z0-9_.-], nothing else; a
/// trailing CR is tolerated) yields the name. Anything else is log output.
std::optional<std::string> parse_child_event(std::string_view line);

/// Splits a byte stream into lines across arbitrary chunk boundaries.
class LineSplitter {
 public:
  /// Calls `emit` for every completed line, without its terminator.
  template <class Fn>
  void feed(std::string_view chunk, Fn&& emit) {
    for (char c : chunk) {
      if (c == '\n') {
        emit(std::string_view(partial_));
        partial_.clear();
      } else {
        partial_ += c;
      }
    }
  }

  /// The unterminated remainder, if any, emitted at end of stream.
  template <class Fn>
  void finish(Fn&& emit) {
    if (!partial_.empty()) emit(std::string_view(partial_));
    partial_.clear();
  }

 private:
  std::string partial_;
};

}  // namespace mnsm::node
