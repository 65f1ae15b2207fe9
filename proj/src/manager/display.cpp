// SPDX-License-Identifier: Apache-2.0

#include "mnsm/manager/display.hpp"

#include "mnsm/core/codec.hpp"

namespace mnsm::manager {

using nlohmann::json;

json DisplaySnapshot::to_json() const {
  json nodes = json::array();
  for (const auto& t : tiles) nodes.push_back(core::to_json(t));
  return json{{"seq", seq}, {"nodes", std::move(nodes)}, {"summary", core::to_json(summary)}};
}

json update_record(std::uint64_t seq, const core::Display& update) {
  json j{{"seq", seq}};
  if (const auto* tile = std::get_if<core::NodeTile>(&update.update)) {
    j["tile"] = core::to_json(*tile);
  } else {
    j["summary"] = core::to_json(std::get<core::Summary>(update.update));
  }
  return j;
}

DisplayHub::DisplayHub(std::size_t backlog) : capacity_(backlog == 0 ? 1 : backlog) {}

void DisplayHub::publish(const core::Display& update) {
  {
    std::lock_guard lock(mu_);
    ++seq_;
    if (const auto* tile = std::get_if<core::NodeTile>(&update.update)) {
      tiles_[tile->name] = *tile;
    } else {
      summary_ = std::get<core::Summary>(update.update);
    }
    backlog_.emplace_back(seq_, update_record(seq_, update));
    if (backlog_.size() > capacity_) backlog_.pop_front();
  }
  cv_.notify_all();
}

DisplaySnapshot DisplayHub::snapshot() const {
  std::lock_guard lock(mu_);
  DisplaySnapshot s;
  s.seq = seq_;
  s.summary = summary_;
  s.tiles.reserve(tiles_.size());
  for (const auto& [_, t] : tiles_) s.tiles.push_back(t);
  return s;
}

std::optional<std::vector<json>> DisplayHub::since(std::uint64_t after,
                                                   std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return closed_ || seq_ > after; });
  std::vector<json> out;
  if (closed_ || seq_ <= after) return out;
  if (backlog_.empty() || backlog_.front().first > after + 1) return std::nullopt;
  for (const auto& [seq, record] : backlog_) {
    if (seq > after) out.push_back(record);
  }
  return out;
}

void DisplayHub::shutdown() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

std::uint64_t DisplayHub::seq() const {
  std::lock_guard lock(mu_);
  return seq_;
}

}  // namespace mnsm::manager
