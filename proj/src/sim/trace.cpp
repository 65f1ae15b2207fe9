// SPDX-License-Identifier: Apache-2.0

#include "mnsm/sim/trace.hpp"

#include <sstream>
#include <stdexcept>

#include "mnsm/core/aggregator.hpp"
#include "mnsm/core/codec.hpp"

namespace mnsm::sim {

using nlohmann::json;

std::vector<std::string> Trace::published() const {
  std::vector<std::string> out;
  for (const auto& r : records) {
    for (const auto& e : r.effects) {
      if (const auto* p = std::get_if<core::PublishAggregate>(&e)) out.push_back(p->state);
    }
  }
  return out;
}

std::string Trace::to_jsonl() const {
  std::string out;
  out += json{{"trace", "mnsm"}, {"version", 1}, {"name", name}, {"config", core::to_json(config)}}
             .dump();
  out += '\n';
  for (const auto& r : records) {
    out += json{{"t", r.t}, {"event", core::to_json(r.event)},
                {"effects", core::effects_to_json(r.effects)}}
               .dump();
    out += '\n';
  }
  return out;
}

Trace Trace::from_jsonl(std::string_view text) {
  Trace trace;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = json::parse(line);
      if (!header) {
        if (j.value("trace", "") != "mnsm") throw std::invalid_argument("not a trace header");
        trace.name = j.value("name", "");
        trace.config = core::config_from_json(j.at("config"));
        header = true;
        continue;
      }
      TraceRecord r;
      r.t = j.at("t").get<Tick>();
      r.event = core::event_from_json(j.at("event"));
      for (const auto& e : j.at("effects")) r.effects.push_back(core::effect_from_json(e));
      trace.records.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw std::invalid_argument("trace line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!header) throw std::invalid_argument("trace: missing header");
  return trace;
}

ReplayResult replay(const Trace& trace) {
  ReplayResult result;
  core::Aggregator core(trace.config);
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    auto effects = core.ingest(r.event);
    ++result.records;
    if (effects != r.effects) {
      result.first_mismatch = i;
      result.detail = "record " + std::to_string(i) + " at t=" + std::to_string(r.t) +
                      ": expected " + core::effects_to_json(r.effects).dump() + ", got " +
                      core::effects_to_json(effects).dump();
      return result;
    }
  }
  return result;
}

}  // namespace mnsm::sim
