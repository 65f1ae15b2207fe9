// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <condition_variable>
#include <filesystem>
#include <future>
#include <mutex>

#include "mnsm/node/child_event.hpp"
#include "mnsm/node/daemon_core.hpp"
#include "mnsm/node/log_file.hpp"
#include "mnsm/node/managed_process.hpp"

using namespace mnsm::node;
using namespace std::chrono_literals;
namespace fs = std::filesystem;
using mnsm::machine::StateClass;
using mnsm::machine::Trigger;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mnsm-node-test-" + std::to_string(::getpid()) + "-" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

std::string child(const std::string& args) { return std::string(MNSM_DEMO_CHILD) + " " + args; }

// Records what a ManagedProcess reports.
struct Observer {
  std::mutex mu;
  std::condition_variable cv;
  std::vector<std::pair<std::uint64_t, std::string>> events;
  std::vector<std::pair<std::uint64_t, int>> exits;

  ManagedProcess::EventFn on_event() {
    return [this](std::uint64_t g, std::string n) {
      std::lock_guard lock(mu);
      events.emplace_back(g, std::move(n));
      cv.notify_all();
    };
  }
  ManagedProcess::ExitFn on_exit() {
    return [this](std::uint64_t g, int c) {
      std::lock_guard lock(mu);
      exits.emplace_back(g, c);
      cv.notify_all();
    };
  }
  bool wait_exits(std::size_t n, std::chrono::milliseconds d = 10s) {
    std::unique_lock lock(mu);
    return cv.wait_for(lock, d, [&] { return exits.size() >= n; });
  }
  bool wait_events(std::size_t n, std::chrono::milliseconds d = 10s) {
    std::unique_lock lock(mu);
    return cv.wait_for(lock, d, [&] { return events.size() >= n; });
  }
};

std::shared_ptr<const mnsm::machine::MachineSpec> farm() {
  static auto spec = std::make_shared<const mnsm::machine::MachineSpec>(
      mnsm::machine::load_spec_file(std::string(MNSM_DEMO_DIR) + "/trigger-farm.sm"));
  return spec;
}

}  // namespace

// ---------------------------------------------------------------------------
// Event framing

TEST(ChildEvent, Parsing) {
  EXPECT_EQ(parse_child_event("EVENT allocated"), "allocated");
  EXPECT_EQ(parse_child_event("EVENT a.b-c_9\r"), "a.b-c_9");
  EXPECT_FALSE(parse_child_event("EVENT"));
  EXPECT_FALSE(parse_child_event("EVENT "));
  EXPECT_FALSE(parse_child_event("EVENT  two"));
  EXPECT_FALSE(parse_child_event("EVENT a b"));
  EXPECT_FALSE(parse_child_event("event allocated"));
  EXPECT_FALSE(parse_child_event(" EVENT x"));
  EXPECT_FALSE(parse_child_event("EVENT x!"));
  EXPECT_FALSE(parse_child_event("progress 40%"));
}

TEST(ChildEvent, SplitterSurvivesAnyChunking) {
  std::string stream;
  std::vector<std::string> expected;
  for (int i = 0; i < 10000; ++i) {
    std::string line = i % 100 == 0 ? "EVENT e" + std::to_string(i / 100) : "log line " + std::to_string(i);
    stream += line + "\n";
    expected.push_back(line);
  }
  stream += "tail without newline";
  expected.push_back("tail without newline");

  for (std::size_t chunk : {1u, 7u, 4096u, 1u << 20}) {
    LineSplitter splitter;
    std::vector<std::string> got;
    int events = 0;
    auto emit = [&](std::string_view l) {
      got.emplace_back(l);
      if (parse_child_event(l)) ++events;
    };
    for (std::size_t at = 0; at < stream.size(); at += chunk) {
      splitter.feed(std::string_view(stream).substr(at, chunk), emit);
    }
    splitter.finish(emit);
    EXPECT_EQ(got, expected) << chunk;
    EXPECT_EQ(events, 100) << chunk;
  }
}

// ---------------------------------------------------------------------------
// Log file

TEST(LogFile, TailAndRotation) {
  TempDir dir;
  LogFile log(dir.path / "n.log", 1000);
  for (int i = 0; i < 10; ++i) log.append("line " + std::to_string(i));
  EXPECT_EQ(log.tail(3), (std::vector<std::string>{"line 7", "line 8", "line 9"}));
  EXPECT_EQ(log.tail(100).size(), 10u);
  EXPECT_TRUE(log.tail(0).empty());

  for (int i = 0; i < 200; ++i) log.append("filler " + std::to_string(i));
  EXPECT_GE(log.rotations(), 1u);
  EXPECT_TRUE(fs::exists(dir.path / "n.log.1"));
  EXPECT_LE(fs::file_size(dir.path / "n.log"), 1000u);
  EXPECT_EQ(log.tail(1), std::vector<std::string>{"filler 199"});
}

// ---------------------------------------------------------------------------
// Managed process

TEST(ManagedProcess, EventsLogAndExitCode) {
  TempDir dir;
  auto log = std::make_shared<LogFile>(dir.path / "c.log");
  Observer obs;
  ManagedProcess p({child("--events a@0,b@10 --noise 3 --linger 0 --exit 3"), log, 1000ms, dir.path / "scratch"},
                   obs.on_event(), obs.on_exit());
  auto gen = p.start();
  ASSERT_TRUE(gen);
  ASSERT_TRUE(obs.wait_exits(1));
  EXPECT_EQ(obs.exits[0], std::make_pair(*gen, 3));
  ASSERT_EQ(obs.events.size(), 2u);
  EXPECT_EQ(obs.events[0].second, "a");
  EXPECT_EQ(obs.events[1].second, "b");
  auto lines = log->tail(100);
  EXPECT_NE(std::find(lines.begin(), lines.end(), "work item 2"), lines.end());
  EXPECT_EQ(std::count_if(lines.begin(), lines.end(),
                          [](const std::string& l) { return l.rfind("EVENT", 0) == 0; }),
            0);
  EXPECT_FALSE(p.alive());
}

TEST(ManagedProcess, KillTerminatesTheGroup) {
  TempDir dir;
  Observer obs;
  ManagedProcess p({child("--linger -1"), std::make_shared<LogFile>(dir.path / "c.log"), 2000ms, dir.path / "s"},
                   obs.on_event(), obs.on_exit());
  ASSERT_TRUE(p.start());
  std::this_thread::sleep_for(100ms);
  ASSERT_TRUE(p.alive());
  p.kill();
  ASSERT_TRUE(obs.wait_exits(1));
  EXPECT_EQ(obs.exits[0].second, 128 + SIGTERM);
}

TEST(ManagedProcess, StubbornChildGetsKilledAfterGrace) {
  TempDir dir;
  Observer obs;
  ManagedProcess p({child("--linger -1 --ignore-term"), std::make_shared<LogFile>(dir.path / "c.log"), 300ms,
                    dir.path / "s"},
                   obs.on_event(), obs.on_exit());
  ASSERT_TRUE(p.start());
  std::this_thread::sleep_for(150ms);
  auto t0 = std::chrono::steady_clock::now();
  p.kill();
  ASSERT_TRUE(obs.wait_exits(1));
  auto took = std::chrono::steady_clock::now() - t0;
  EXPECT_EQ(obs.exits[0].second, 128 + SIGKILL);
  EXPECT_GE(took, 250ms);
  EXPECT_LT(took, 5s);
}

TEST(ManagedProcess, SpawnFailureReports127) {
  TempDir dir;
  Observer obs;
  ManagedProcess p({"/nonexistent/binary --flag", std::make_shared<LogFile>(dir.path / "c.log"), 500ms, dir.path / "s"},
                   obs.on_event(), obs.on_exit());
  ASSERT_TRUE(p.start());
  ASSERT_TRUE(obs.wait_exits(1));
  EXPECT_EQ(obs.exits[0].second, kSpawnFailureCode);
}

TEST(ManagedProcess, RestartGetsNewGenerationAndRefusesLiveChild) {
  TempDir dir;
  Observer obs;
  ManagedProcess p({child("--linger -1"), std::make_shared<LogFile>(dir.path / "c.log"), 1000ms, dir.path / "s"},
                   obs.on_event(), obs.on_exit());
  auto g1 = p.start();
  ASSERT_TRUE(g1);
  EXPECT_FALSE(p.start());
  p.kill();
  auto g2 = p.start();
  ASSERT_TRUE(g2);
  EXPECT_NE(*g1, *g2);
  ASSERT_TRUE(obs.wait_exits(1));
  EXPECT_EQ(obs.exits[0].first, *g1);
  p.kill();
  ASSERT_TRUE(obs.wait_exits(2));
  EXPECT_EQ(obs.exits[1].first, *g2);
}

TEST(ManagedProcess, CleanupRemovesScratchAndSeesIt) {
  TempDir dir;
  Observer obs;
  auto scratch = dir.path / "scratch";
  ManagedProcess p({"sh -c 'test -d \"$MNSM_SCRATCH\" && echo EVENT has_scratch'", std::make_shared<LogFile>(dir.path / "c.log"),
                    500ms, scratch},
                   obs.on_event(), obs.on_exit());
  ASSERT_TRUE(p.start());
  ASSERT_TRUE(obs.wait_exits(1));
  ASSERT_EQ(obs.events.size(), 1u);
  EXPECT_EQ(obs.events[0].second, "has_scratch");
  EXPECT_EQ(obs.exits[0].second, 0);
  p.cleanup();
  EXPECT_FALSE(fs::exists(scratch));
}

// ---------------------------------------------------------------------------
// Daemon core

TEST(DaemonCore, ReportsFollowStateClasses) {
  DaemonCore core(farm());
  EXPECT_EQ(core.current_report()->state, "READY");

  auto s = core.handle(Trigger::command("START"));
  EXPECT_EQ(s.actions, std::vector<mnsm::machine::Action>{mnsm::machine::Action::start_process});
  EXPECT_FALSE(s.report);  // ALLOCATING is micro
  EXPECT_FALSE(core.current_report());

  s = core.handle(Trigger::event("connecting"));
  ASSERT_TRUE(s.report);
  EXPECT_EQ(s.report->cls, StateClass::minor);
  EXPECT_EQ(s.report->color, "yellow");

  s = core.handle(Trigger::event("allocated"));
  ASSERT_TRUE(s.report);
  EXPECT_EQ(*s.report, (StateReport{"ALLOCATED", StateClass::major, "blue", ""}));
}

TEST(DaemonCore, CommandsAlwaysAnswered) {
  DaemonCore core(farm());
  auto s = core.handle(Trigger::command("RESET"));  // READY -> READY
  ASSERT_TRUE(s.report);
  EXPECT_EQ(s.report->state, "READY");

  s = core.handle(Trigger::command("CONFIGURE"));  // no rule from READY
  EXPECT_FALSE(s.matched);
  EXPECT_FALSE(s.report);
  EXPECT_FALSE(s.log.empty());
}

TEST(DaemonCore, ExitCodesReachErrorStates) {
  DaemonCore core(farm());
  core.handle(Trigger::command("START"));
  auto s = core.handle(Trigger::exit(2));
  ASSERT_TRUE(s.report);
  EXPECT_EQ(*s.report, (StateReport{"CRASHED", StateClass::error, "red", "exit 2"}));

  DaemonCore clean(farm());
  clean.handle(Trigger::command("START"));
  s = clean.handle(Trigger::exit(0));
  EXPECT_EQ(s.report->state, "EXITED");
}

TEST(DaemonCore, UnmatchedExitForcesFirstErrorState) {
  auto spec = std::make_shared<const mnsm::machine::MachineSpec>(mnsm::machine::parse_spec(R"(machine m
state READY class=major color=green initial
state BUSY class=major color=blue
state BROKEN class=error color=red
trans READY on command GO do start_process -> BUSY
)"));
  DaemonCore core(spec);
  core.handle(Trigger::command("GO"));
  auto s = core.handle(Trigger::exit(9));
  EXPECT_FALSE(s.matched);
  ASSERT_TRUE(s.report);
  EXPECT_EQ(*s.report, (StateReport{"BROKEN", StateClass::error, "red", "exit 9"}));
  EXPECT_EQ(core.state(), "BROKEN");

  // Events no rule covers are only logged.
  s = core.handle(Trigger::event("whatever"));
  EXPECT_FALSE(s.report);
  EXPECT_EQ(core.state(), "BROKEN");
}

TEST(DaemonCore, DisconnectKillsAndReturnsToReady) {
  DaemonCore core(farm());
  core.handle(Trigger::command("START"));
  core.handle(Trigger::event("allocated"));
  auto s = core.handle(Trigger::disconnect());
  EXPECT_EQ(s.actions, (std::vector<mnsm::machine::Action>{mnsm::machine::Action::kill_process,
                                                            mnsm::machine::Action::cleanup}));
  EXPECT_EQ(core.state(), "READY");
}
