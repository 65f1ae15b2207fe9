// SPDX-License-Identifier: Apache-2.0

#include "mnsm/sim/enumerate.hpp"

#include <algorithm>
#include <limits>

#include "mnsm/core/aggregator.hpp"
#include "mnsm/core/codec.hpp"
#include "mnsm/sim/invariants.hpp"

namespace mnsm::sim {

using namespace mnsm::core;

bool EnumerationResult::all_end_with(const std::string& state) const {
  return std::all_of(outcomes.begin(), outcomes.end(), [&](const auto& kv) {
    return !kv.first.empty() && kv.first.back() == state;
  });
}

std::uint64_t count_interleavings(const std::vector<Lane>& lanes) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t result = 1;
  std::uint64_t total = 0;
  for (const auto& lane : lanes) {
    // result *= C(total + k, k), built one factor at a time so each
    // intermediate stays an exact binomial.
    for (std::uint64_t i = 1; i <= lane.items.size(); ++i) {
      ++total;
      unsigned __int128 next = static_cast<unsigned __int128>(result) * total / i;
      if (next > kMax) return kMax;
      result = static_cast<std::uint64_t>(next);
    }
  }
  return result;
}

namespace {

struct Stepper {
  Aggregator core;
  InvariantMonitor monitor;
  std::vector<OracleInput> oracle_inputs;
  std::vector<std::string> published;
  std::vector<std::string> steps;
  std::optional<std::string> violation;

  explicit Stepper(const ManagerConfig& config) : core(config) {}

  void feed(const ManagerEvent& event, const OracleInput& in) {
    steps.push_back(in.describe());
    oracle_inputs.push_back(in);
    auto effects = core.ingest(event);
    for (const auto& e : effects) {
      if (const auto* p = std::get_if<PublishAggregate>(&e)) published.push_back(p->state);
    }
    if (auto v = monitor.observe(event, core.state(), effects); v && !violation) {
      violation = "after '" + in.describe() + "': " + *v;
    }
  }

  void feed_item(const std::string& node, const LaneItem& item) {
    switch (item.kind) {
      case LaneItem::Kind::report:
        feed(Report{node, item.value, ReportClass::major, {}, {}},
             OracleInput::report(node, item.value));
        break;
      case LaneItem::Kind::error:
        feed(Report{node, item.value, ReportClass::error, {}, {}},
             OracleInput::report(node, item.value, ReportClass::error));
        break;
      case LaneItem::Kind::disconnect:
        feed(NodeDisconnected{node}, OracleInput::disconnect(node));
        break;
      case LaneItem::Kind::command:
        feed(ControllerCommand{item.value}, OracleInput::command(item.value));
        break;
      case LaneItem::Kind::timeout: {
        // Fires whatever timer is armed right now; with none armed, a stale
        // firing that the core must ignore.
        TimerFired fired{TimerKind::command, 0};
        if (const auto& t = core.state().timer) fired = TimerFired{t->kind, t->generation};
        feed(fired, OracleInput::timeout());
        break;
      }
    }
  }
};

}  // namespace

EnumerationResult enumerate_interleavings(const EnumerationCase& c, std::uint64_t guard) {
  const auto count = count_interleavings(c.lanes);
  if (count > guard) {
    throw ExplosionGuardExceeded(std::to_string(count) + " interleavings exceed the guard of " +
                                 std::to_string(guard));
  }

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < c.lanes.size(); ++i) {
    order.insert(order.end(), c.lanes[i].items.size(), i);
  }

  EnumerationResult result;
  do {
    Stepper st(c.config);
    if (c.start) {
      for (const auto& n : c.nodes) st.feed(NodeConnected{n}, OracleInput::connect(n));
      for (const auto& n : c.nodes) {
        st.feed(Report{n, std::string(kReady), ReportClass::major, {}, {}},
                OracleInput::report(n, std::string(kReady)));
      }
      st.feed(ControllerCommand{std::string(kStart)}, OracleInput::command(std::string(kStart)));
    }
    std::vector<std::size_t> cursor(c.lanes.size(), 0);
    for (auto lane : order) {
      st.feed_item(c.lanes[lane].node, c.lanes[lane].items[cursor[lane]++]);
    }

    auto expected = oracle_aggregate(st.oracle_inputs, c.config).published;
    ++result.interleavings;
    ++result.outcomes[st.published];
    const bool mismatch = expected != st.published;
    if (mismatch) ++result.mismatches;
    if (st.violation) {
      ++result.invariant_violations;
      if (st.violation->find("while in ERROR") != std::string::npos) ++result.latch_breaks;
    }
    if ((mismatch || st.violation) && !result.first_counterexample) {
      result.first_counterexample =
          Counterexample{st.steps, st.published, expected,
                         mismatch ? "core and oracle disagree" : *st.violation};
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return result;
}

EnumerationCase enumeration_case_from_json(const nlohmann::json& j) {
  EnumerationCase c;
  if (!j.is_object()) throw std::invalid_argument("enumeration case: expected an object");
  for (const auto& n : j.at("nodes")) c.nodes.push_back(n.get<std::string>());
  if (j.contains("config")) c.config = config_from_json(j.at("config"));
  c.start = j.value("start", true);
  for (const auto& [owner, items] : j.at("lanes").items()) {
    Lane lane{owner == "*" ? std::string() : owner, {}};
    for (const auto& item : items) {
      if (item.is_string()) {
        lane.items.push_back(LaneItem::report(item.get<std::string>()));
      } else if (item.contains("error")) {
        lane.items.push_back(LaneItem::error(item.at("error").get<std::string>()));
      } else if (item.contains("disconnect")) {
        lane.items.push_back(LaneItem::disconnect());
      } else if (item.contains("command")) {
        lane.items.push_back(LaneItem::command(item.at("command").get<std::string>()));
      } else if (item.contains("timeout")) {
        lane.items.push_back(LaneItem::timeout());
      } else {
        throw std::invalid_argument("lane " + owner + ": unrecognised item " + item.dump());
      }
    }
    c.lanes.push_back(std::move(lane));
  }
  return c;
}

}  // namespace mnsm::sim
