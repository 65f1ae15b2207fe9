// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "mnsm/core/aggregator.hpp"
#include "mnsm/core/codec.hpp"

using namespace mnsm::core;

namespace {

template <class T>
std::vector<T> all_of_type(const Effects& effects) {
  std::vector<T> out;
  for (const auto& e : effects) {
    if (auto* p = std::get_if<T>(&e)) out.push_back(*p);
  }
  return out;
}

std::vector<std::string> sends(const Effects& effects, std::string_view command = {}) {
  std::vector<std::string> out;
  for (const auto& s : all_of_type<SendToNode>(effects)) {
    if (command.empty() || s.command == command) out.push_back(s.node);
  }
  return out;
}

std::vector<std::string> published(const Effects& effects) {
  std::vector<std::string> out;
  for (const auto& p : all_of_type<PublishAggregate>(effects)) out.push_back(p.state);
  return out;
}

Report major(const std::string& node, const std::string& state) {
  return Report{node, state, ReportClass::major, "blue", ""};
}

Report error_report(const std::string& node) {
  return Report{node, "FAILED", ReportClass::error, "red", "boom"};
}

ManagerConfig config(int min, int max, int max_errors = 0, int timeout_ms = 1000) {
  ManagerConfig c;
  c.min_nodes = min;
  c.max_nodes = max;
  c.max_errors = max_errors;
  c.timeout = Duration(timeout_ms);
  return c;
}

// Connects every node and has it report READY, so all are available.
struct Rig {
  Aggregator agg;
  std::vector<std::string> publishes;

  explicit Rig(const std::vector<std::string>& nodes, ManagerConfig c = config(1, 100))
      : agg(c) {
    for (const auto& n : nodes) {
      feed(NodeConnected{n});
      feed(major(n, "READY"));
    }
  }

  Effects feed(const ManagerEvent& e) {
    auto effects = agg.ingest(e);
    for (auto& p : published(effects)) publishes.push_back(p);
    return effects;
  }

  const ManagerState& s() const { return agg.state(); }
  const NodeRecord& node(const std::string& n) const { return s().nodes.at(n); }

  std::uint64_t timer_gen() const { return s().timer ? s().timer->generation : 0; }

  // START, then every active node reports each state of `steps` in turn,
  // node by node.
  void drive(const std::vector<std::string>& steps) {
    feed(ControllerCommand{"START"});
    std::vector<std::string> active;
    for (const auto& [n, rec] : s().nodes) {
      if (rec.active) active.push_back(n);
    }
    for (const auto& st : steps) {
      for (const auto& n : active) feed(major(n, st));
    }
  }
};

std::vector<std::string> names(int n, const std::string& prefix = "n") {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%02d", prefix.c_str(), i);
    out.push_back(buf);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// START

TEST(Start, SendsStartToSelectedNodesAndArmsCommandTimer) {
  Rig r({"c", "a", "b"}, config(2, 2));
  auto fx = r.feed(ControllerCommand{"START"});
  EXPECT_EQ(sends(fx, "START"), (std::vector<std::string>{"a", "b"}));
  auto timers = all_of_type<SetTimer>(fx);
  ASSERT_EQ(timers.size(), 1u);
  EXPECT_EQ(timers[0].kind, TimerKind::command);
  EXPECT_EQ(timers[0].timeout, Duration(1000));
  EXPECT_TRUE(r.node("a").active);
  EXPECT_TRUE(r.node("b").active);
  EXPECT_FALSE(r.node("c").active);
  EXPECT_TRUE(published(fx).empty());
}

TEST(Start, TooFewAvailableGoesToErrorWithoutSending) {
  Rig r({"a"}, config(2, 5));
  auto fx = r.feed(ControllerCommand{"START"});
  EXPECT_TRUE(sends(fx).empty());
  EXPECT_EQ(published(fx), std::vector<std::string>{"ERROR"});
  EXPECT_EQ(r.s().aggregate, "ERROR");
}

TEST(Start, FiftyNodesAllActive) {
  Rig r(names(50), config(1, 50));
  auto fx = r.feed(ControllerCommand{"START"});
  EXPECT_EQ(sends(fx, "START").size(), 50u);
  EXPECT_EQ(r.s().active_count(), 50u);
}

TEST(Start, SelectionMatchesSortAndPrefixOracle) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    int n = static_cast<int>(rng() % 9);
    int min = 1 + static_cast<int>(rng() % 5);
    int max = min + static_cast<int>(rng() % 4);
    Aggregator agg(config(min, max));
    std::vector<std::string> eligible;
    auto pool = names(n, "x");
    std::shuffle(pool.begin(), pool.end(), rng);
    for (const auto& name : pool) {
      agg.ingest(NodeConnected{name});
      switch (rng() % 4) {
        case 0:  // connected, never reported
          break;
        case 1:  // reported READY then vanished
          agg.ingest(major(name, "READY"));
          agg.ingest(NodeDisconnected{name});
          break;
        case 2:  // reported a state while idle: unavailable
          agg.ingest(major(name, "READY"));
          agg.ingest(major(name, "ALLOCATED"));
          break;
        default:
          agg.ingest(major(name, "READY"));
          eligible.push_back(name);
      }
    }
    std::sort(eligible.begin(), eligible.end());
    auto fx = agg.ingest(ControllerCommand{"START"});
    if (static_cast<int>(eligible.size()) < min) {
      EXPECT_TRUE(sends(fx, "START").empty());
      EXPECT_EQ(published(fx), std::vector<std::string>{"ERROR"});
    } else {
      eligible.resize(std::min<std::size_t>(eligible.size(), max));
      EXPECT_EQ(sends(fx, "START"), eligible) << "trial " << trial;
      EXPECT_TRUE(published(fx).empty());
    }
  }
}

TEST(Start, RefusedUnlessIdleInReady) {
  Rig r({"a", "b"});
  r.feed(ControllerCommand{"START"});
  auto fx = r.feed(ControllerCommand{"START"});
  EXPECT_TRUE(sends(fx).empty());
  EXPECT_TRUE(all_of_type<SetTimer>(fx).empty());

  r.feed(major("a", "ALLOCATED"));
  r.feed(major("b", "ALLOCATED"));
  ASSERT_EQ(r.s().aggregate, "ALLOCATED");
  fx = r.feed(ControllerCommand{"START"});
  EXPECT_TRUE(sends(fx).empty());
}

// ---------------------------------------------------------------------------
// Generic commands

TEST(GenericCommand, RoutedToActiveNodesOnly) {
  Rig r({"a", "b", "c"}, config(2, 2));
  r.drive({"ALLOCATED"});
  ASSERT_EQ(r.s().aggregate, "ALLOCATED");
  auto fx = r.feed(ControllerCommand{"CONFIGURE"});
  EXPECT_EQ(sends(fx, "CONFIGURE"), (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(all_of_type<SetTimer>(fx).size(), 1u);
  EXPECT_EQ(all_of_type<SetTimer>(fx)[0].kind, TimerKind::command);

  r.feed(major("a", "CONFIGURED"));
  fx = r.feed(major("b", "CONFIGURED"));
  EXPECT_EQ(published(fx), std::vector<std::string>{"CONFIGURED"});
  EXPECT_EQ(all_of_type<CancelTimer>(fx).size(), 1u);
  EXPECT_FALSE(r.s().timer);
}

TEST(GenericCommand, PartialResponseTimesOutToError) {
  Rig r({"a", "b"});
  r.drive({"ALLOCATED"});
  r.feed(ControllerCommand{"CONFIGURE"});
  r.feed(major("a", "CONFIGURED"));
  auto fx = r.feed(TimerFired{TimerKind::command, r.timer_gen()});
  EXPECT_EQ(published(fx), std::vector<std::string>{"ERROR"});
  EXPECT_EQ(phase_name(r.s().phase), phase_name(Phase{Errored{}}));
}

TEST(GenericCommand, DroppedOutsideCoherentOperatingState) {
  Rig r({"a", "b"});
  EXPECT_TRUE(sends(r.feed(ControllerCommand{"CONFIGURE"})).empty());  // READY, nothing active
  r.drive({"ALLOCATED"});
  r.feed(major("a", "CONFIGURED"));  // b still ALLOCATED: in transition
  EXPECT_TRUE(sends(r.feed(ControllerCommand{"RUN"})).empty());
}

TEST(GenericCommand, SecondCommandBeforeFirstTookEffectIsDropped) {
  Rig r({"a"});
  r.drive({"ALLOCATED"});
  r.feed(ControllerCommand{"CONFIGURE"});
  auto fx = r.feed(ControllerCommand{"RUN"});
  EXPECT_TRUE(sends(fx).empty());
}

// ---------------------------------------------------------------------------
// Reports

TEST(Reports, DuplicateOfCurrentStateOnlyLogs) {
  Rig r({"n1", "n2"});
  r.drive({"RUNNING"});
  auto before = r.s();
  auto fx = r.feed(major("n1", "RUNNING"));
  EXPECT_TRUE(published(fx).empty());
  EXPECT_TRUE(sends(fx).empty());
  EXPECT_FALSE(all_of_type<Log>(fx).empty());
  EXPECT_EQ(r.s().phase, before.phase);
  EXPECT_EQ(r.s().aggregate, "RUNNING");
}

TEST(Reports, MinorReportOnlyUpdatesTile) {
  Rig r({"a", "b"});
  r.feed(ControllerCommand{"START"});
  r.feed(major("a", "ALLOCATED"));
  auto before = r.s();
  auto fx = r.feed(Report{"b", "CONNECTING", ReportClass::minor, "yellow", ""});
  for (const auto& e : fx) EXPECT_TRUE(std::holds_alternative<Display>(e));
  ASSERT_EQ(fx.size(), 1u);
  EXPECT_EQ(std::get<NodeTile>(std::get<Display>(fx[0]).update).state, "CONNECTING");
  EXPECT_EQ(r.s().phase, before.phase);
  EXPECT_TRUE(r.node("b").pending.empty());
}

TEST(Reports, InactiveMajorReportMarksUnavailableAndResets) {
  Rig r({"a", "b", "c"}, config(2, 2));
  r.drive({"ALLOCATED"});
  auto fx = r.feed(major("c", "ALLOCATED"));
  EXPECT_EQ(sends(fx, "RESET"), std::vector<std::string>{"c"});
  EXPECT_TRUE(r.node("c").unavailable);
  EXPECT_FALSE(r.node("c").active);
  EXPECT_EQ(r.s().aggregate, "ALLOCATED");
  EXPECT_EQ(r.s().error_count, 0);
  EXPECT_TRUE(published(fx).empty());

  // READY from an inactive node is just bookkeeping.
  fx = r.feed(major("c", "READY"));
  EXPECT_TRUE(sends(fx).empty());
}

TEST(Reports, UnknownNodeIgnored) {
  Rig r({"a"});
  auto before = r.s();
  auto fx = r.feed(major("ghost", "RUNNING"));
  EXPECT_EQ(r.s(), before);
  EXPECT_EQ(all_of_type<Log>(fx).size(), 1u);
}

// ---------------------------------------------------------------------------
// Error counting

TEST(ErrorThreshold, ErrorExactlyAtMaxPlusOne) {
  for (int k : {0, 1, 2, 5}) {
    for (bool via_disconnect : {false, true}) {
      Rig r(names(k + 3), config(1, 100, k));
      r.feed(ControllerCommand{"START"});
      for (int i = 1; i <= k + 1; ++i) {
        auto n = names(k + 3)[i - 1];
        auto fx = via_disconnect ? r.feed(NodeDisconnected{n}) : r.feed(error_report(n));
        bool is_error = r.s().aggregate == "ERROR";
        EXPECT_EQ(is_error, i == k + 1) << "k=" << k << " i=" << i;
        EXPECT_EQ(published(fx).size(), i == k + 1 ? 1u : 0u);
      }
    }
  }
}

TEST(ErrorThreshold, CrashedWithCountAtLimitTrips) {
  Rig r({"a", "b", "c", "d"}, config(1, 100, 2));
  r.feed(ControllerCommand{"START"});
  r.feed(error_report("a"));
  r.feed(error_report("b"));
  ASSERT_EQ(r.s().error_count, 2);
  auto fx = r.feed(Report{"c", "CRASHED", ReportClass::error, "red", ""});
  EXPECT_EQ(published(fx), std::vector<std::string>{"ERROR"});
}

TEST(ErrorThreshold, CounterResetsEachEpoch) {
  Rig r({"a", "b", "c"}, config(1, 100, 1));
  r.feed(ControllerCommand{"START"});
  r.feed(error_report("a"));
  EXPECT_EQ(r.s().error_count, 1);
  r.feed(ControllerCommand{"RESET"});
  EXPECT_EQ(r.s().error_count, 0);
}

TEST(ErrorThreshold, InactiveNodesDoNotCount) {
  Rig r({"a", "b", "c"}, config(1, 1, 0));
  r.feed(ControllerCommand{"START"});
  r.feed(error_report("b"));
  r.feed(NodeDisconnected{"c"});
  EXPECT_EQ(r.s().error_count, 0);
  EXPECT_NE(r.s().aggregate, "ERROR");
  EXPECT_TRUE(r.node("c").dead);
}

// ---------------------------------------------------------------------------
// Coherence

TEST(Coherence, HeldPendingReportsPublishInOrder) {
  Rig r({"a", "b"});
  r.feed(ControllerCommand{"START"});
  r.feed(major("a", "A"));
  r.feed(major("a", "B"));
  EXPECT_EQ(r.node("a").pending, std::deque<std::string>{"B"});
  r.feed(major("b", "A"));
  r.feed(major("b", "B"));
  EXPECT_EQ(r.publishes, (std::vector<std::string>{"A", "B"}));
}

TEST(Coherence, SkippingAStateIsAConflict) {
  Rig r({"a", "b"});
  r.feed(ControllerCommand{"START"});
  r.feed(major("a", "A"));
  auto fx = r.feed(major("b", "B"));
  EXPECT_EQ(published(fx), std::vector<std::string>{"ERROR"});
}

TEST(Coherence, DrainToReady) {
  Rig r({"a", "b"});
  r.drive({"RUNNING"});
  r.feed(major("a", "READY"));
  EXPECT_FALSE(r.node("a").active);
  EXPECT_EQ(r.s().aggregate, "RUNNING");
  auto fx = r.feed(major("b", "READY"));
  EXPECT_EQ(published(fx), std::vector<std::string>{"READY"});
  EXPECT_EQ(r.s().active_count(), 0u);
}

TEST(Coherence, ReadyDuringTransitionShrinksRequiredSet) {
  Rig r({"a", "b", "c"});
  r.drive({"RUNNING"});
  r.feed(major("a", "PAUSED"));
  r.feed(major("b", "READY"));
  EXPECT_TRUE(r.publishes.back() == "RUNNING");
  auto fx = r.feed(major("c", "PAUSED"));
  EXPECT_EQ(published(fx), std::vector<std::string>{"PAUSED"});
}

TEST(Coherence, SpontaneousTransitionArmsTransitionTimer) {
  Rig r({"a", "b"});
  r.drive({"RUNNING"});
  ASSERT_FALSE(r.s().timer);
  auto fx = r.feed(major("a", "PAUSED"));
  auto timers = all_of_type<SetTimer>(fx);
  ASSERT_EQ(timers.size(), 1u);
  EXPECT_EQ(timers[0].kind, TimerKind::transition);
  fx = r.feed(TimerFired{TimerKind::transition, timers[0].generation});
  EXPECT_EQ(published(fx), std::vector<std::string>{"ERROR"});
}

TEST(Coherence, CommandTimerBoundsCommandedTransition) {
  Rig r({"a", "b"});
  r.drive({"ALLOCATED"});
  r.feed(ControllerCommand{"CONFIGURE"});
  auto gen = r.timer_gen();
  auto fx = r.feed(major("a", "CONFIGURED"));
  EXPECT_TRUE(all_of_type<SetTimer>(fx).empty());
  EXPECT_EQ(r.timer_gen(), gen);
}

TEST(Timers, StaleGenerationIgnored) {
  Rig r({"a", "b"});
  r.feed(ControllerCommand{"START"});
  auto gen = r.timer_gen();
  r.feed(major("a", "ALLOCATED"));
  r.feed(major("b", "ALLOCATED"));
  ASSERT_FALSE(r.s().timer);
  auto before = r.s();
  auto fx = r.feed(TimerFired{TimerKind::command, gen});
  EXPECT_EQ(r.s(), before);
  EXPECT_TRUE(published(fx).empty());

  r.feed(ControllerCommand{"CONFIGURE"});
  fx = r.feed(TimerFired{TimerKind::command, gen});  // older generation
  EXPECT_TRUE(published(fx).empty());
  fx = r.feed(TimerFired{TimerKind::transition, r.timer_gen()});  // wrong kind
  EXPECT_TRUE(published(fx).empty());
}

// ---------------------------------------------------------------------------
// Disconnects

TEST(Disconnect, MidTransitionCompletesWithSurvivorsUnderBudget) {
  Rig r({"a", "b", "c"}, config(1, 100, 1));
  r.drive({"ALLOCATED"});
  r.feed(ControllerCommand{"CONFIGURE"});
  r.feed(major("a", "CONFIGURED"));
  r.feed(major("b", "CONFIGURED"));
  auto fx = r.feed(NodeDisconnected{"c"});
  EXPECT_EQ(published(fx), std::vector<std::string>{"CONFIGURED"});
  const auto& c = r.node("c");
  EXPECT_TRUE(c.dead);
  EXPECT_FALSE(c.connected);
  EXPECT_FALSE(c.active);
  EXPECT_TRUE(c.unavailable);
}

TEST(Disconnect, AtLimitGoesToError) {
  Rig r({"a", "b"}, config(1, 100, 0));
  r.drive({"ALLOCATED"});
  auto fx = r.feed(NodeDisconnected{"b"});
  EXPECT_EQ(published(fx), std::vector<std::string>{"ERROR"});
}

TEST(Disconnect, IdleNodeIsBookkeepingOnly) {
  Rig r({"a", "b", "c"}, config(1, 2));
  r.drive({"ALLOCATED"});
  auto fx = r.feed(NodeDisconnected{"c"});
  EXPECT_TRUE(published(fx).empty());
  EXPECT_EQ(r.s().aggregate, "ALLOCATED");
  auto tiles = all_of_type<Display>(fx);
  ASSERT_FALSE(tiles.empty());
  EXPECT_TRUE(std::get<NodeTile>(tiles[0].update).dead);
}

TEST(Disconnect, ReconnectIsFreshButStaysUnavailable) {
  Rig r({"a", "b"});
  r.feed(NodeDisconnected{"b"});
  r.feed(NodeConnected{"b"});
  r.feed(major("b", "READY"));
  EXPECT_TRUE(r.node("b").connected);
  EXPECT_FALSE(r.node("b").dead);
  EXPECT_TRUE(r.node("b").unavailable);
  EXPECT_FALSE(r.node("b").available());

  r.feed(OperatorAction{OperatorActionKind::restart, "b"});
  EXPECT_FALSE(r.node("b").unavailable);
  r.feed(major("b", "READY"));
  EXPECT_TRUE(r.node("b").available());
}

TEST(Disconnect, ReconnectOverLiveSessionCountsAsLoss) {
  Rig r({"a", "b"}, config(1, 100, 5));
  r.feed(ControllerCommand{"START"});
  r.feed(NodeConnected{"b"});
  EXPECT_EQ(r.s().error_count, 1);
  EXPECT_TRUE(r.node("b").connected);
  EXPECT_FALSE(r.node("b").active);
  EXPECT_TRUE(r.node("b").unavailable);
}

// ---------------------------------------------------------------------------
// ERROR latch and RESET

TEST(Latch, NothingIsSentUntilReset) {
  Rig r({"a", "b", "c", "d"});
  r.feed(ControllerCommand{"START"});
  r.feed(major("a", "A"));
  r.feed(major("b", "B"));
  ASSERT_EQ(r.s().aggregate, "ERROR");
  for (const ManagerEvent& e :
       std::vector<ManagerEvent>{ControllerCommand{"START"}, ControllerCommand{"CONFIGURE"},
                                 major("c", "A"), major("a", "READY"), error_report("d"),
                                 NodeDisconnected{"d"}, TimerFired{TimerKind::command, 99}}) {
    auto fx = r.feed(e);
    EXPECT_TRUE(sends(fx).empty());
    EXPECT_TRUE(published(fx).empty());
    EXPECT_EQ(r.s().aggregate, "ERROR");
  }
  EXPECT_FALSE(r.node("a").active);  // READY still deactivates

  auto fx = r.feed(ControllerCommand{"RESET"});
  EXPECT_EQ(sends(fx, "RESET"), (std::vector<std::string>{"a", "b", "c"}));
  for (const auto& n : {"a", "b", "c"}) r.feed(major(n, "READY"));
  EXPECT_EQ(r.publishes.back(), "READY");
  EXPECT_EQ(r.s().active_count(), 0u);
  EXPECT_TRUE(std::holds_alternative<Coherent>(r.s().phase));
}

TEST(Reset, AbortsTransitionAndClearsPending) {
  Rig r({"a", "b"});
  r.feed(ControllerCommand{"START"});
  r.feed(major("a", "A"));
  r.feed(major("a", "B"));
  auto fx = r.feed(ControllerCommand{"RESET"});
  EXPECT_TRUE(std::holds_alternative<Resetting>(r.s().phase));
  EXPECT_TRUE(r.node("a").pending.empty());
  EXPECT_EQ(sends(fx, "RESET").size(), 2u);
  EXPECT_EQ(all_of_type<SetTimer>(fx).size(), 1u);
}

TEST(Reset, StragglerMarkedUnavailableAndReadyPublished) {
  Rig r({"n1", "n2", "n3"});
  r.drive({"RUNNING"});
  r.feed(ControllerCommand{"RESET"});
  r.feed(major("n1", "READY"));
  r.feed(major("n2", "READY"));
  auto fx = r.feed(TimerFired{TimerKind::command, r.timer_gen()});
  EXPECT_EQ(published(fx), std::vector<std::string>{"READY"});
  EXPECT_TRUE(r.node("n3").unavailable);
  EXPECT_FALSE(r.node("n3").active);
  EXPECT_FALSE(r.node("n1").unavailable);
}

TEST(Reset, NonReadyAnswerMarksUnavailable) {
  Rig r({"a", "b"});
  r.drive({"RUNNING"});
  r.feed(ControllerCommand{"RESET"});
  r.feed(major("a", "READY"));
  auto fx = r.feed(major("b", "STUCK"));
  EXPECT_EQ(published(fx), std::vector<std::string>{"READY"});
  EXPECT_TRUE(r.node("b").unavailable);
}

TEST(Reset, WithNoNodesCompletesAtOnce) {
  Aggregator agg;
  auto fx = agg.ingest(ControllerCommand{"RESET"});
  EXPECT_EQ(published(fx), std::vector<std::string>{"READY"});
  EXPECT_FALSE(agg.state().timer);
}

// ---------------------------------------------------------------------------
// Configuration

TEST(Config, Validation) {
  EXPECT_TRUE(config(1, 1).validate().empty());
  EXPECT_FALSE(config(0, 1).validate().empty());
  EXPECT_FALSE(config(3, 2).validate().empty());
  EXPECT_FALSE(config(1, 2, -1).validate().empty());
  EXPECT_FALSE(config(1, 2, 0, 0).validate().empty());
}

TEST(Config, TakesEffectAtNextEpochOnly) {
  Rig r({"a", "b", "c"}, config(1, 100, 2));
  r.feed(ControllerCommand{"START"});
  r.feed(error_report("a"));
  r.feed(ConfigChange{config(1, 100, 0)});
  EXPECT_EQ(r.s().config.max_errors, 2);
  EXPECT_NE(r.s().aggregate, "ERROR");  // no retroactive ERROR
  r.feed(error_report("b"));
  EXPECT_NE(r.s().aggregate, "ERROR");

  r.feed(ControllerCommand{"RESET"});
  EXPECT_EQ(r.s().config.max_errors, 0);
}

TEST(Config, InvalidChangeRejected) {
  Rig r({"a"});
  auto before = r.s();
  r.feed(ConfigChange{config(5, 2)});
  EXPECT_EQ(r.s().next_config, before.next_config);
}

// ---------------------------------------------------------------------------
// Operator actions

TEST(Operator, KillSendsTargetedReset) {
  Rig r({"a", "b"});
  r.drive({"RUNNING"});
  auto fx = r.feed(OperatorAction{OperatorActionKind::kill, "b"});
  EXPECT_EQ(sends(fx, "RESET"), std::vector<std::string>{"b"});
  EXPECT_EQ(r.s().last_action, "operator killed b");
}

TEST(Operator, ClearUnavailableWithoutReset) {
  Rig r({"a"});
  r.feed(NodeDisconnected{"a"});
  auto fx = r.feed(OperatorAction{OperatorActionKind::clear_unavailable, "a"});
  EXPECT_TRUE(sends(fx).empty());
  EXPECT_FALSE(r.node("a").unavailable);
}

// ---------------------------------------------------------------------------
// Purity and encoding

TEST(Purity, IngestMatchesAggregatorAndIsDeterministic) {
  std::vector<ManagerEvent> events = {
      NodeConnected{"a"}, major("a", "READY"), NodeConnected{"b"}, major("b", "READY"),
      ControllerCommand{"START"}, major("a", "A"), major("b", "A"), ControllerCommand{"GO"},
      major("b", "B"), NodeDisconnected{"a"}, ControllerCommand{"RESET"}, major("b", "READY")};
  Aggregator agg;
  ManagerState s1, s2;
  for (const auto& e : events) {
    auto fx = agg.ingest(e);
    auto a = ingest(s1, e);
    auto b = ingest(s2, e);
    EXPECT_EQ(a.effects, fx);
    EXPECT_EQ(b.effects, fx);
    s1 = a.state;
    s2 = b.state;
    EXPECT_EQ(s1, agg.state());
  }
}

TEST(Codec, EventsAndEffectsRoundTrip) {
  std::vector<ManagerEvent> events = {
      NodeConnected{"a"},
      NodeDisconnected{"a"},
      Report{"a", "CONNECTING", ReportClass::minor, "yellow", "x y"},
      Report{"a", "CRASHED", ReportClass::error, "red", ""},
      ControllerCommand{"START"},
      OperatorAction{OperatorActionKind::clear_unavailable, "n"},
      TimerFired{TimerKind::transition, 42},
      ConfigChange{config(2, 7, 3, 1500)},
  };
  for (const auto& e : events) EXPECT_EQ(event_from_json(to_json(e)), e);

  Effects effects = {SendToNode{"a", "RESET"}, SetTimer{TimerKind::command, Duration(30), 3},
                     CancelTimer{TimerKind::transition, 4}, PublishAggregate{"RUNNING"},
                     Log{"line"}};
  Rig r({"a"});
  for (const auto& e : r.feed(ControllerCommand{"START"})) effects.push_back(e);
  for (const auto& e : effects) EXPECT_EQ(effect_from_json(to_json(e)), e);
}

TEST(Codec, ConfigFromJsonOverlaysBase) {
  auto base = config(2, 9, 1, 5000);
  auto c = config_from_json(json{{"max_errors", 4}}, base);
  EXPECT_EQ(c.min_nodes, 2);
  EXPECT_EQ(c.max_errors, 4);
  EXPECT_THROW(config_from_json(json{{"min_nodes", "two"}}, base), std::invalid_argument);
}
