// SPDX-License-Identifier: Apache-2.0
//
// The one child process a daemon owns. The command line is run as
// `sh -c "exec <command line>"`, so a compound command has to be wrapped in
// its own `sh -c '...'`. The child gets its own process group with stdout
// and stderr on a single pipe; a monitor thread splits that pipe into event
// lines and log lines and reports the exit status exactly once per child.

#pragma once

#include <sys/types.h>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "mnsm/node/log_file.hpp"

namespace mnsm::node {

using Duration = std::chrono::milliseconds;

inline constexpr Duration kDefaultKillGrace{5000};
inline constexpr int kSpawnFailureCode = 127;

class ManagedProcess {
 public:
  /// Both callbacks run on the monitor thread and carry the child's
  /// generation so the owner can discard output of a superseded child.
  using EventFn = std::function<void(std::uint64_t generation, std::string name)>;
  using ExitFn = std::function<void(std::uint64_t generation, int code)>;

  struct Options {
    std::string command_line;
    std::shared_ptr<LogFile> log;
    Duration kill_grace = kDefaultKillGrace;
    /// Exported to the child as MNSM_SCRATCH; removed by cleanup().
    std::filesystem::path scratch_dir;
  };

  ManagedProcess(Options options, EventFn on_event, ExitFn on_exit);
  ~ManagedProcess();
  ManagedProcess(const ManagedProcess&) = delete;
  ManagedProcess& operator=(const ManagedProcess&) = delete;

  /// Spawns a new child and returns its generation. A previous child that
  /// is being killed is waited for (its exit is still reported, under the
  /// old generation); a previous child that is alive and was not asked to
  /// die makes this return nullopt. Spawn failure reports exit 127.
  std::optional<std::uint64_t> start();

  /// SIGTERM to the child's group, SIGKILL after the grace period. No-op
  /// without a live child.
  void kill();

  /// kill() and wait for the monitor to report the exit. Callbacks do not
  /// run after this returns.
  void shutdown();

  /// Removes the scratch directory. Pipe output is drained by the monitor
  /// before the exit is reported, so nothing is left to read afterwards.
  void cleanup();

  bool alive() const;
  std::optional<pid_t> pid() const;
  std::uint64_t generation() const;

 private:
  struct Child;
  void monitor(std::shared_ptr<Child> child);

  Options options_;
  EventFn on_event_;
  ExitFn on_exit_;
  mutable std::mutex mu_;
  std::shared_ptr<Child> child_;
  std::uint64_t generation_ = 0;
};

}  // namespace mnsm::node
