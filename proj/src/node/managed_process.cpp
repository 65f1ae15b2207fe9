// SPDX-License-Identifier: Apache-2.0

#include "mnsm/node/managed_process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <vector>

#include "mnsm/node/child_event.hpp"

extern char** environ;

namespace mnsm::node {
namespace {

std::int64_t steady_ms() {
  return std::chrono::duration_cast<Duration>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

int decode_status(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return 255;
}

}  // namespace

struct ManagedProcess::Child {
  pid_t pid = -1;
  int fd = -1;
  std::uint64_t generation = 0;
  std::atomic<bool> exited{false};
  std::atomic<bool> kill_requested{false};
  std::atomic<std::int64_t> kill_deadline{0};
  std::thread thread;
};

ManagedProcess::ManagedProcess(Options options, EventFn on_event, ExitFn on_exit)
    : options_(std::move(options)), on_event_(std::move(on_event)), on_exit_(std::move(on_exit)) {}

ManagedProcess::~ManagedProcess() { shutdown(); }

void ManagedProcess::shutdown() {
  kill();
  std::shared_ptr<Child> c;
  {
    std::lock_guard lock(mu_);
    c = std::move(child_);
  }
  if (c && c->thread.joinable()) c->thread.join();
}

std::optional<std::uint64_t> ManagedProcess::start() {
  std::shared_ptr<Child> previous;
  {
    std::lock_guard lock(mu_);
    if (child_ && !child_->exited && !child_->kill_requested) return std::nullopt;
    previous = std::move(child_);
  }
  if (previous && previous->thread.joinable()) previous->thread.join();

  std::lock_guard lock(mu_);
  auto child = std::make_shared<Child>();
  child->generation = ++generation_;

  if (!options_.scratch_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(options_.scratch_dir, ec);
  }

  // Everything the child needs is built before fork: only async-signal-safe
  // calls are allowed between fork and exec.
  std::vector<std::string> env_strings;
  for (char** e = environ; e && *e; ++e) {
    if (std::strncmp(*e, "MNSM_SCRATCH=", 13) != 0) env_strings.emplace_back(*e);
  }
  env_strings.push_back("MNSM_SCRATCH=" + options_.scratch_dir.string());
  std::vector<char*> envp;
  for (auto& s : env_strings) envp.push_back(s.data());
  envp.push_back(nullptr);
  std::string script = "exec " + options_.command_line;
  char sh[] = "/bin/sh";
  char dash_c[] = "-c";
  char* argv[] = {sh, dash_c, script.data(), nullptr};

  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) == 0) {
    child->pid = ::fork();
    if (child->pid == 0) {
      ::setpgid(0, 0);
      ::dup2(fds[1], STDOUT_FILENO);
      ::dup2(fds[1], STDERR_FILENO);
      int null_fd = ::open("/dev/null", O_RDONLY);
      if (null_fd >= 0) ::dup2(null_fd, STDIN_FILENO);
      sigset_t none;
      sigemptyset(&none);
      ::sigprocmask(SIG_SETMASK, &none, nullptr);
      ::signal(SIGPIPE, SIG_DFL);
      ::execve(sh, argv, envp.data());
      ::_exit(kSpawnFailureCode);
    }
    ::close(fds[1]);
    if (child->pid > 0) {
      ::setpgid(child->pid, child->pid);
      child->fd = fds[0];
      ::fcntl(child->fd, F_SETFL, ::fcntl(child->fd, F_GETFL) | O_NONBLOCK);
    } else {
      ::close(fds[0]);
    }
  }

  child->thread = std::thread(&ManagedProcess::monitor, this, child);
  child_ = child;
  return child->generation;
}

void ManagedProcess::monitor(std::shared_ptr<Child> child) {
  const auto gen = child->generation;
  if (child->pid <= 0) {
    child->exited = true;
    if (options_.log) options_.log->append("[daemon] spawn failed: " + std::string(std::strerror(errno)));
    on_exit_(gen, kSpawnFailureCode);
    return;
  }

  LineSplitter splitter;
  auto on_line = [&](std::string_view line) {
    if (auto ev = parse_child_event(line)) {
      on_event_(gen, std::move(*ev));
    } else if (options_.log) {
      options_.log->append(line);
    }
  };
  bool eof = false;
  auto drain = [&] {
    char buf[4096];
    while (!eof) {
      ssize_t n = ::read(child->fd, buf, sizeof buf);
      if (n > 0) {
        splitter.feed(std::string_view(buf, static_cast<std::size_t>(n)), on_line);
      } else if (n == 0) {
        eof = true;
      } else if (errno == EINTR) {
        continue;
      } else {
        if (errno != EAGAIN && errno != EWOULDBLOCK) eof = true;
        break;
      }
    }
  };

  int status = 0;
  bool hard_killed = false;
  for (;;) {
    if (!eof) {
      pollfd p{child->fd, POLLIN, 0};
      ::poll(&p, 1, 50);
      drain();
    } else {
      std::this_thread::sleep_for(Duration(20));
    }
    pid_t r = ::waitpid(child->pid, &status, WNOHANG);
    if (r == child->pid || (r < 0 && errno == ECHILD)) break;
    if (child->kill_requested && !hard_killed && steady_ms() >= child->kill_deadline) {
      ::kill(-child->pid, SIGKILL);
      hard_killed = true;
    }
  }
  // The child is gone; take what it left in the pipe without waiting on
  // any grandchild that may still hold the write end.
  drain();
  splitter.finish(on_line);
  if (child->kill_requested) ::kill(-child->pid, SIGKILL);
  ::close(child->fd);
  child->exited = true;
  on_exit_(gen, decode_status(status));
}

void ManagedProcess::kill() {
  std::lock_guard lock(mu_);
  if (!child_ || child_->exited || child_->pid <= 0 || child_->kill_requested) return;
  child_->kill_deadline = steady_ms() + options_.kill_grace.count();
  child_->kill_requested = true;
  if (::kill(-child_->pid, SIGTERM) != 0) ::kill(child_->pid, SIGTERM);
}

void ManagedProcess::cleanup() {
  if (options_.scratch_dir.empty()) return;
  std::error_code ec;
  std::filesystem::remove_all(options_.scratch_dir, ec);
}

bool ManagedProcess::alive() const {
  std::lock_guard lock(mu_);
  return child_ && !child_->exited && child_->pid > 0;
}

std::optional<pid_t> ManagedProcess::pid() const {
  std::lock_guard lock(mu_);
  if (!child_ || child_->exited || child_->pid <= 0) return std::nullopt;
  return child_->pid;
}

std::uint64_t ManagedProcess::generation() const {
  std::lock_guard lock(mu_);
  return generation_;
}

}  // namespace mnsm::node
