// SPDX-License-Identifier: Apache-2.0
//
// Fan-out of display updates to operator consoles. Keeps the current tile
// set and summary so a console can snapshot at any sequence number, and a
// bounded backlog of recent updates for consoles catching up from there.

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mnsm/core/types.hpp"

namespace mnsm::manager {

inline constexpr std::size_t kDefaultBacklog = 1000;

struct DisplaySnapshot {
  std::uint64_t seq = 0;  // last update folded into this snapshot
  std::vector<core::NodeTile> tiles;
  core::Summary summary;

  nlohmann::json to_json() const;
};

class DisplayHub {
 public:
  explicit DisplayHub(std::size_t backlog = kDefaultBacklog);

  /// Assigns the next sequence number and wakes waiting consoles.
  void publish(const core::Display& update);

  DisplaySnapshot snapshot() const;

  /// Update records with seq > `after`, waiting up to `timeout` for at
  /// least one. nullopt if some of them already left the backlog: the
  /// console fell too far behind and has to re-snapshot.
  std::optional<std::vector<nlohmann::json>> since(std::uint64_t after,
                                                   std::chrono::milliseconds timeout);

  /// Releases all waiters; since() returns empty from now on.
  void shutdown();

  std::uint64_t seq() const;
  std::size_t backlog_capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::uint64_t seq_ = 0;
  std::deque<std::pair<std::uint64_t, nlohmann::json>> backlog_;
  std::map<std::string, core::NodeTile> tiles_;
  core::Summary summary_ = core::make_summary(core::ManagerState{});
  bool closed_ = false;
};

/// Wire form of one update: {"seq": n, "tile": {...}} or {"seq": n, "summary": {...}}.
nlohmann::json update_record(std::uint64_t seq, const core::Display& update);

}  // namespace mnsm::manager
