// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "mnsm/core/aggregator.hpp"
#include "mnsm/sim/enumerate.hpp"
#include "mnsm/sim/invariants.hpp"
#include "mnsm/sim/oracle.hpp"

using namespace mnsm;
using namespace mnsm::sim;
using core::ManagerConfig;

namespace {

using Published = std::vector<std::string>;

EnumerationCase load_case(const std::string& file) {
  std::ifstream in(std::string(MNSM_DEMO_DIR) + "/cases/" + file);
  return enumeration_case_from_json(nlohmann::json::parse(in));
}

ManagerConfig config(int min, int max, int max_errors) {
  ManagerConfig c;
  c.min_nodes = min;
  c.max_nodes = max;
  c.max_errors = max_errors;
  return c;
}

// n lanes, each reporting the same trajectory.
EnumerationCase uniform(int nodes, const std::vector<std::string>& trajectory) {
  EnumerationCase c;
  c.config = config(nodes, nodes, 0);
  for (int i = 0; i < nodes; ++i) {
    std::string name(1, static_cast<char>('a' + i));
    c.nodes.push_back(name);
    Lane lane{name, {}};
    for (const auto& s : trajectory) lane.items.push_back(LaneItem::report(s));
    c.lanes.push_back(lane);
  }
  return c;
}

// Multinomial coefficient by brute-force counting of distinct merges.
std::uint64_t brute_count(std::vector<int> remaining) {
  bool any = false;
  std::uint64_t total = 0;
  for (auto& r : remaining) {
    if (r == 0) continue;
    any = true;
    --r;
    total += brute_count(remaining);
    ++r;
  }
  return any ? total : 1;
}

}  // namespace

TEST(Counting, MatchesBruteForce) {
  for (const auto& sizes : std::vector<std::vector<int>>{{2, 2}, {2, 2, 2}, {3, 3, 3}, {1, 4}, {0, 3}, {2, 3, 1, 1}}) {
    std::vector<Lane> lanes;
    for (int n : sizes) lanes.push_back(Lane{"x", std::vector<LaneItem>(n, LaneItem::report("S"))});
    EXPECT_EQ(count_interleavings(lanes), brute_count(sizes));
  }
  EXPECT_EQ(count_interleavings(uniform(2, {"A", "B"}).lanes), 6u);
  EXPECT_EQ(count_interleavings(uniform(3, {"A", "B"}).lanes), 90u);
  EXPECT_EQ(count_interleavings(uniform(3, {"A", "B", "C"}).lanes), 1680u);
}

TEST(Oracle, CommonTrajectoryAnyOrder) {
  using I = OracleInput;
  std::vector<I> base = {I::connect("a"), I::report("a", "READY"), I::connect("b"),
                         I::report("b", "READY"), I::command("START")};
  for (auto order : std::vector<std::string>{"aabb", "abab", "abba", "baab", "baba", "bbaa"}) {
    auto inputs = base;
    std::map<char, int> next;
    for (char n : order) {
      inputs.push_back(I::report(std::string(1, n), next[n]++ == 0 ? "A" : "B"));
    }
    EXPECT_EQ(oracle_aggregate(inputs, config(2, 2, 0)).published, (Published{"A", "B"})) << order;
  }
}

TEST(Oracle, SingleNodeFollowsItsOwnSequence) {
  std::mt19937 rng(3);
  const std::vector<std::string> pool = {"A", "B", "C", "D"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<OracleInput> in = {OracleInput::connect("solo"), OracleInput::report("solo", "READY"),
                                   OracleInput::command("START")};
    Published sigma;
    int len = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < len; ++i) {
      std::string s;
      do s = pool[rng() % pool.size()];
      while (!sigma.empty() && sigma.back() == s);
      sigma.push_back(s);
      in.push_back(OracleInput::report("solo", s));
    }
    EXPECT_EQ(oracle_aggregate(in, config(1, 1, 0)).published, sigma);
  }
}

TEST(Enumeration, ThreeNodesTwoStates) {
  auto r = enumerate_interleavings(uniform(3, {"A", "B"}));
  EXPECT_EQ(r.interleavings, 90u);
  EXPECT_TRUE(r.clean());
  ASSERT_EQ(r.outcomes.size(), 1u);
  EXPECT_EQ(r.outcomes.begin()->first, (Published{"A", "B"}));
}

TEST(Enumeration, ThreeNodesThreeStates) {
  auto r = enumerate_interleavings(load_case("trajectory-3x3.json"));
  EXPECT_EQ(r.interleavings, 1680u);
  EXPECT_EQ(r.mismatches, 0u);
  EXPECT_EQ(r.invariant_violations, 0u);
  ASSERT_EQ(r.outcomes.size(), 1u);
  EXPECT_EQ(r.outcomes.begin()->first, (Published{"ALLOCATED", "CONFIGURED", "RUNNING"}));
}

TEST(Enumeration, HeldPending) {
  auto r = enumerate_interleavings(load_case("held-pending.json"));
  EXPECT_EQ(r.interleavings, 6u);
  EXPECT_TRUE(r.clean());
  ASSERT_EQ(r.outcomes.size(), 1u);
  EXPECT_EQ(r.outcomes.begin()->first, (Published{"A", "B"}));
}

TEST(Enumeration, ConflictAlwaysErrorsAndLatches) {
  auto r = enumerate_interleavings(load_case("conflict.json"));
  EXPECT_GT(r.interleavings, 0u);
  EXPECT_TRUE(r.clean());
  EXPECT_TRUE(r.all_end_with("ERROR"));
  EXPECT_EQ(r.latch_breaks, 0u);
}

TEST(Enumeration, TwoNodeConflictingSecondStates) {
  auto c = uniform(2, {"A", "B"});
  c.lanes[1].items[1] = LaneItem::report("C");
  auto r = enumerate_interleavings(c);
  EXPECT_TRUE(r.clean());
  EXPECT_TRUE(r.all_end_with("ERROR"));
}

TEST(Enumeration, DisconnectAtEveryPosition) {
  for (int max_errors : {0, 1}) {
    for (std::size_t pos = 0; pos <= 2; ++pos) {
      auto c = uniform(2, {"A", "B"});
      c.config.max_errors = max_errors;
      auto& items = c.lanes[1].items;
      items.resize(pos);
      items.push_back(LaneItem::disconnect());
      auto r = enumerate_interleavings(c);
      EXPECT_TRUE(r.clean()) << "pos " << pos;
      for (const auto& [published, n] : r.outcomes) {
        bool errored = !published.empty() && published.back() == "ERROR";
        EXPECT_EQ(errored, max_errors == 0) << "pos " << pos << " max_errors " << max_errors;
        if (max_errors == 1) {
          EXPECT_EQ(published, (Published{"A", "B"}));
        }
      }
    }
  }
}

TEST(Enumeration, ErrorReportsAndCommandsAgainstOracle) {
  EnumerationCase c = uniform(3, {"A", "B"});
  c.config.max_errors = 1;
  c.lanes[2].items = {LaneItem::report("A"), LaneItem::error("FAILED")};
  c.lanes.push_back(Lane{"", {LaneItem::command("GO"), LaneItem::timeout()}});
  auto r = enumerate_interleavings(c);
  EXPECT_EQ(r.interleavings, count_interleavings(c.lanes));
  EXPECT_TRUE(r.clean()) << (r.first_counterexample ? r.first_counterexample->reason : "");
}

TEST(Enumeration, ExplosionGuard) {
  auto c = uniform(4, {"A", "B", "C", "D", "E"});
  EXPECT_GT(count_interleavings(c.lanes), kInterleavingGuard);
  EXPECT_THROW(enumerate_interleavings(c), ExplosionGuardExceeded);
  EXPECT_NO_THROW(enumerate_interleavings(uniform(2, {"A"}), 2));
  EXPECT_THROW(enumerate_interleavings(uniform(2, {"A", "B"}), 5), ExplosionGuardExceeded);
}

// Random event soup through the core and the oracle side by side.
TEST(Differential, RandomEventSequences) {
  using namespace core;
  std::mt19937_64 rng(20260);
  const std::vector<std::string> names = {"a", "b", "c", "d"};
  const std::vector<std::string> states = {"READY", "A", "B", "C"};
  const std::vector<std::string> commands = {"START", "RESET", "GO", "START"};
  int mismatches = 0;
  for (int trial = 0; trial < 20000 && mismatches < 3; ++trial) {
    ManagerConfig cfg = config(1 + static_cast<int>(rng() % 3), 0, static_cast<int>(rng() % 3));
    cfg.max_nodes = cfg.min_nodes + static_cast<int>(rng() % 3);
    Aggregator agg(cfg);
    InvariantMonitor monitor;
    std::vector<OracleInput> inputs;
    Published published;
    std::vector<std::string> sent;
    std::optional<std::string> violation;
    int len = 5 + static_cast<int>(rng() % 40);
    for (int i = 0; i < len; ++i) {
      ManagerEvent ev;
      int k = static_cast<int>(rng() % 100);
      const auto& n = names[rng() % names.size()];
      if (k < 10) {
        ev = NodeConnected{n};
      } else if (k < 15) {
        ev = NodeDisconnected{n};
      } else if (k < 60) {
        ev = Report{n, states[rng() % states.size()], ReportClass::major, "", ""};
      } else if (k < 66) {
        ev = Report{n, "CRASH", ReportClass::error, "", ""};
      } else if (k < 70) {
        ev = Report{n, "MINOR", ReportClass::minor, "", ""};
      } else if (k < 85) {
        ev = ControllerCommand{commands[rng() % commands.size()]};
      } else {
        TimerFired f{TimerKind::command, 0};
        if (agg.state().timer) f = {agg.state().timer->kind, agg.state().timer->generation};
        ev = f;
      }
      OracleInput in;
      ASSERT_TRUE(to_oracle_input(ev, in));
      inputs.push_back(in);
      auto effects = agg.ingest(ev);
      for (const auto& e : effects) {
        if (auto* p = std::get_if<PublishAggregate>(&e)) published.push_back(p->state);
        if (auto* s = std::get_if<SendToNode>(&e)) sent.push_back(s->node + ":" + s->command);
      }
      if (auto v = monitor.observe(ev, agg.state(), effects); v && !violation) violation = v;
      if (auto v = check_state(agg.state()); v && !violation) violation = v;
    }
    auto expected = oracle_aggregate(inputs, cfg);
    std::set<std::string> unavailable;
    for (const auto& [name, node] : agg.state().nodes) {
      if (node.unavailable) unavailable.insert(name);
    }
    bool same = expected.published == published && expected.sends == sent &&
                expected.unavailable == unavailable && !violation;
    if (!same) {
      ++mismatches;
      std::string steps;
      for (const auto& in : inputs) steps += "  " + in.describe() + "\n";
      ADD_FAILURE() << "trial " << trial << (violation ? " violation: " + *violation : "")
                    << "\n" << steps;
    }
  }
  EXPECT_EQ(mismatches, 0);
}
