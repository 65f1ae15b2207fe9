// SPDX-License-Identifier: Apache-2.0

#include "mnsm/sim/runner.hpp"

#include <algorithm>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <tuple>
#include <variant>

#include "mnsm/core/aggregator.hpp"
#include "mnsm/machine/instance.hpp"

namespace mnsm::sim {

using namespace mnsm::core;
using machine::Trigger;

namespace {

enum Class { kDelivery = 0, kNode = 1, kController = 2, kTimer = 3 };

struct ToManager {
  ManagerEvent event;
};
struct ToNode {
  std::string node;
  std::string command;
  std::uint64_t session;
};
struct StepDue {
  std::string node;
};
struct ChildExit {
  std::string node;
  int code;
  std::uint64_t child;
};
struct ResetReply {
  std::string node;
  std::uint64_t session;
};
struct ControllerDue {};
struct TimerDue {
  TimerKind kind;
  std::uint64_t generation;
};
using Payload =
    std::variant<ToManager, ToNode, StepDue, ChildExit, ResetReply, ControllerDue, TimerDue>;

struct Item {
  Tick t;
  int cls;
  std::uint64_t rank;
  std::uint64_t seq;
  Payload payload;
};

struct Later {
  bool operator()(const Item& a, const Item& b) const {
    return std::tie(a.t, a.cls, a.rank, a.seq) > std::tie(b.t, b.cls, b.rank, b.seq);
  }
};

ReportClass report_class(machine::StateClass cls) {
  switch (cls) {
    case machine::StateClass::major: return ReportClass::major;
    case machine::StateClass::minor: return ReportClass::minor;
    case machine::StateClass::micro: return ReportClass::micro;
    case machine::StateClass::error: return ReportClass::error;
  }
  return ReportClass::major;
}

struct SimNode {
  const NodeScript* script = nullptr;
  std::uint64_t rank = 0;
  std::size_t next = 0;
  bool step_scheduled = false;
  std::vector<std::string> inbox;
  bool connected = true;
  bool deaf = false;
  std::uint64_t session = 1;
  std::optional<machine::MachineInstance> machine;
  bool child_running = false;
  std::uint64_t child = 0;
  std::string raw_state{kReady};
  Tick up_last = 0;
  Tick down_last = 0;

  const std::string& name() const { return script->name; }
};

class Runner {
 public:
  explicit Runner(const Scenario& sc) : sc_(sc), core_(sc.config), rng_(sc.seed.value_or(0)) {
    std::vector<std::string> names;
    for (const auto& s : sc.nodes) names.push_back(s.name);
    std::sort(names.begin(), names.end());
    std::vector<std::uint64_t> ranks(names.size());
    for (std::size_t i = 0; i < ranks.size(); ++i) ranks[i] = i + 1;
    if (sc.seed) std::shuffle(ranks.begin(), ranks.end(), rng_);
    for (const auto& s : sc.nodes) {
      auto& n = nodes_[s.name];
      n.script = &s;
      n.rank = ranks[static_cast<std::size_t>(
          std::lower_bound(names.begin(), names.end(), s.name) - names.begin())];
      if (sc.machine) n.machine.emplace(sc.machine);
    }
    result_.trace.name = sc.name;
    result_.trace.config = sc.config;
  }

  RunResult run() {
    for (const auto& s : sc_.nodes) {
      auto& n = nodes_.at(s.name);
      to_manager(n, NodeConnected{n.name()}, true);
      report_current(n);
    }
    for (const auto& s : sc_.nodes) advance_script(nodes_.at(s.name));
    controller_arm();

    while (!queue_.empty()) {
      auto item = queue_.top();
      if (item.t > sc_.max_time) {
        result_.hit_time_limit = true;
        break;
      }
      queue_.pop();
      now_ = item.t;
      std::visit([&](auto& p) { handle(p); }, item.payload);
    }

    // Cancelled timers still sit in the queue; time ends at the last core step.
    result_.end_time = result_.trace.records.empty() ? 0 : result_.trace.records.back().t;
    result_.final_state = core_.state();
    for (auto& [name, n] : nodes_) {
      if (n.machine) result_.node_states[name] = n.machine->current();
    }
    return std::move(result_);
  }

 private:
  void push(Tick t, int cls, std::uint64_t rank, Payload p) {
    queue_.push(Item{t, cls, rank, seq_++, std::move(p)});
  }

  /// Arrival time on a link: latency plus seeded jitter, never earlier than
  /// the previous message on the same link.
  Tick link_time(Tick& last) {
    Tick t = now_ + sc_.latency;
    if (sc_.seed && sc_.jitter > 0) t += std::uniform_int_distribution<Tick>(0, sc_.jitter)(rng_);
    t = std::max(t, last);
    last = t;
    return t;
  }

  void to_manager(SimNode& n, ManagerEvent ev, bool session_event = false) {
    if (!n.connected && !session_event) return;
    push(link_time(n.up_last), kDelivery, n.rank, ToManager{std::move(ev)});
  }

  void ingest(const ManagerEvent& ev) {
    auto effects = core_.ingest(ev);
    for (const auto& e : effects) {
      if (const auto* send = std::get_if<SendToNode>(&e)) {
        auto it = nodes_.find(send->node);
        if (it == nodes_.end() || !it->second.connected) continue;
        auto& n = it->second;
        push(link_time(n.down_last), kDelivery, n.rank, ToNode{send->node, send->command, n.session});
      } else if (const auto* st = std::get_if<SetTimer>(&e)) {
        live_timers_.insert(st->generation);
        push(now_ + st->timeout.count(), kTimer, 0, TimerDue{st->kind, st->generation});
      } else if (const auto* ct = std::get_if<CancelTimer>(&e)) {
        live_timers_.erase(ct->generation);
      } else if (const auto* p = std::get_if<PublishAggregate>(&e)) {
        controller_observe(p->state);
      }
    }
    result_.trace.records.push_back(TraceRecord{now_, ev, std::move(effects)});
  }

  // -- nodes ----------------------------------------------------------------

  void report_current(SimNode& n, const std::string& override_state = {}) {
    if (!override_state.empty()) {
      to_manager(n, Report{n.name(), override_state, ReportClass::major, "", ""});
      return;
    }
    if (!n.machine) {
      to_manager(n, Report{n.name(), n.raw_state, ReportClass::major,
                           n.raw_state == kReady ? "green" : "", ""});
      return;
    }
    const auto& desc = n.machine->current_descriptor();
    if (machine::report_decision(n.machine->spec(), desc.name) == machine::ReportDecision::suppress) {
      return;
    }
    to_manager(n, Report{n.name(), desc.name, report_class(desc.cls), desc.color, ""});
  }

  void fire(SimNode& n, const Trigger& trigger) {
    auto outcome = n.machine->fire(trigger);
    if (!outcome) {
      if (trigger.kind == Trigger::Kind::exit) {
        if (const auto* err = n.machine->spec().first_error_state()) {
          n.machine->force(err->name);
          report_current(n);
        }
      }
      return;
    }
    for (auto action : outcome->actions) {
      switch (action) {
        case machine::Action::start_process:
          n.child_running = true;
          ++n.child;
          break;
        case machine::Action::kill_process:
          if (n.child_running) push(now_ + 1, kNode, n.rank, ChildExit{n.name(), 143, n.child});
          break;
        case machine::Action::cleanup:
        case machine::Action::shutdown:
          break;
      }
    }
    if (outcome->new_state != outcome->old_state || trigger.kind == Trigger::Kind::command) {
      report_current(n);
    }
  }

  void advance_script(SimNode& n) {
    const auto& steps = n.script->steps;
    if (n.step_scheduled || n.next >= steps.size()) return;
    const auto& step = steps[n.next];
    if (step.on) {
      auto it = std::find(n.inbox.begin(), n.inbox.end(), *step.on);
      if (it == n.inbox.end()) return;
      n.inbox.erase(n.inbox.begin(), it + 1);
    }
    n.step_scheduled = true;
    push(now_ + step.delay, kNode, n.rank, StepDue{n.name()});
  }

  void run_step(SimNode& n) {
    const auto& step = n.script->steps[n.next++];
    n.step_scheduled = false;
    switch (step.action) {
      case NodeStep::Action::report:
        if (step.cls == ReportClass::major) n.raw_state = step.state;
        to_manager(n, Report{n.name(), step.state, step.cls, step.color, step.detail});
        break;
      case NodeStep::Action::event:
        fire(n, Trigger::event(step.event));
        break;
      case NodeStep::Action::exit:
        if (n.child_running) {
          n.child_running = false;
          fire(n, Trigger::exit(step.code));
        }
        break;
      case NodeStep::Action::disconnect:
        if (n.connected) {
          to_manager(n, NodeDisconnected{n.name()}, true);
          n.connected = false;
          if (n.machine) fire(n, Trigger::disconnect());
        }
        break;
      case NodeStep::Action::reconnect:
        if (!n.connected) {
          n.connected = true;
          n.deaf = false;
          ++n.session;
          to_manager(n, NodeConnected{n.name()}, true);
          report_current(n, step.state);
        }
        break;
      case NodeStep::Action::ignore_command:
        n.deaf = true;
        break;
    }
    advance_script(n);
  }

  // -- controller -----------------------------------------------------------

  void controller_arm() {
    if (ctl_next_ >= sc_.controller.size()) return;
    const auto& step = sc_.controller[ctl_next_];
    if (step.await && *step.await != aggregate_) {
      ctl_waiting_ = true;
      return;
    }
    push(now_ + step.delay, kController, 0, ControllerDue{});
  }

  void controller_observe(const std::string& state) {
    aggregate_ = state;
    if (!ctl_waiting_ || ctl_next_ >= sc_.controller.size()) return;
    const auto& step = sc_.controller[ctl_next_];
    if (step.await == state) {
      ctl_waiting_ = false;
      push(now_ + step.delay, kController, 0, ControllerDue{});
    }
  }

  // -- dispatch -------------------------------------------------------------

  void handle(ToManager& p) { ingest(p.event); }

  void handle(ToNode& p) {
    auto& n = nodes_.at(p.node);
    if (!n.connected || p.session != n.session) return;
    result_.received[p.node].push_back(p.command);
    if (n.deaf) return;
    n.inbox.push_back(p.command);
    if (n.machine) {
      fire(n, Trigger::command(p.command));
    } else if (p.command == kReset) {
      push(now_ + sc_.reset_delay, kNode, n.rank, ResetReply{p.node, n.session});
    }
    advance_script(n);
  }

  void handle(StepDue& p) { run_step(nodes_.at(p.node)); }

  void handle(ChildExit& p) {
    auto& n = nodes_.at(p.node);
    if (!n.child_running || p.child != n.child) return;
    n.child_running = false;
    fire(n, Trigger::exit(p.code));
  }

  void handle(ResetReply& p) {
    auto& n = nodes_.at(p.node);
    if (!n.connected || p.session != n.session || n.deaf) return;
    n.raw_state = std::string(kReady);
    report_current(n);
  }

  void handle(ControllerDue&) {
    const auto& step = sc_.controller[ctl_next_++];
    switch (step.kind) {
      case ControllerStep::Kind::command: ingest(ControllerCommand{step.command}); break;
      case ControllerStep::Kind::operator_action: ingest(OperatorAction{step.op, step.node}); break;
      case ControllerStep::Kind::config: ingest(ConfigChange{step.config}); break;
    }
    controller_arm();
  }

  void handle(TimerDue& p) {
    if (!live_timers_.erase(p.generation)) return;
    ingest(TimerFired{p.kind, p.generation});
  }

  const Scenario& sc_;
  Aggregator core_;
  std::mt19937_64 rng_;
  std::map<std::string, SimNode> nodes_;
  std::priority_queue<Item, std::vector<Item>, Later> queue_;
  std::uint64_t seq_ = 0;
  Tick now_ = 0;
  std::set<std::uint64_t> live_timers_;
  std::size_t ctl_next_ = 0;
  bool ctl_waiting_ = false;
  std::string aggregate_{kReady};
  RunResult result_;
};

}  // namespace

RunResult run_scenario(const Scenario& scenario) { return Runner(scenario).run(); }

}  // namespace mnsm::sim
