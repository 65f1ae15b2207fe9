// SPDX-License-Identifier: Apache-2.0

#include "mnsm/core/aggregator.hpp"

#include <algorithm>

namespace mnsm::core {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

class Engine {
 public:
  explicit Engine(ManagerState& state) : s_(state) {}

  Effects run(const ManagerEvent& event) {
    std::map<std::string, NodeTile> tiles_before;
    for (const auto& [name, node] : s_.nodes) tiles_before.emplace(name, make_tile(node));
    const Summary summary_before = make_summary(s_);

    std::visit(Overloaded{
                   [&](const NodeConnected& e) { on_connect(e.node); },
                   [&](const NodeDisconnected& e) { on_disconnect(e.node); },
                   [&](const Report& e) { on_report(e); },
                   [&](const ControllerCommand& e) { on_command(e.name); },
                   [&](const OperatorAction& e) { on_operator(e); },
                   [&](const TimerFired& e) { on_timer(e); },
                   [&](const ConfigChange& e) { on_config(e.config); },
               },
               event);

    for (const auto& [name, node] : s_.nodes) {
      auto tile = make_tile(node);
      auto it = tiles_before.find(name);
      if (it == tiles_before.end() || !(it->second == tile)) {
        out_.push_back(Display{std::move(tile)});
      }
    }
    if (auto summary = make_summary(s_); !(summary == summary_before)) {
      out_.push_back(Display{std::move(summary)});
    }
    return std::move(out_);
  }

 private:
  // -- helpers --------------------------------------------------------------

  void log(std::string line) { out_.push_back(Log{std::move(line)}); }

  void action(std::string line) {
    s_.last_action = line;
    log(std::move(line));
  }

  void send(const std::string& node, std::string_view command) {
    out_.push_back(SendToNode{node, std::string(command)});
  }

  void publish(std::string_view state) { out_.push_back(PublishAggregate{std::string(state)}); }

  bool errored() const { return std::holds_alternative<Errored>(s_.phase); }

  NodeRecord* find(const std::string& name) {
    auto it = s_.nodes.find(name);
    return it == s_.nodes.end() ? nullptr : &it->second;
  }

  void arm_timer(TimerKind kind) {
    cancel_timer();
    s_.timer = ArmedTimer{kind, ++s_.timer_generation};
    out_.push_back(SetTimer{kind, s_.config.timeout, s_.timer->generation});
  }

  void cancel_timer() {
    if (!s_.timer) return;
    out_.push_back(CancelTimer{s_.timer->kind, s_.timer->generation});
    s_.timer.reset();
  }

  void deactivate(NodeRecord& node) {
    node.active = false;
    node.pending.clear();
    if (auto* t = std::get_if<InTransition>(&s_.phase)) t->done.erase(node.name);
  }

  const std::string& current_of(const NodeRecord& node) const {
    return node.last_major ? *node.last_major : s_.aggregate;
  }

  void enter_error(const std::string& why) {
    if (errored()) return;
    cancel_timer();
    s_.pre_error_aggregate = s_.aggregate;
    s_.aggregate = std::string(kError);
    s_.phase = Errored{};
    for (auto& [name, node] : s_.nodes) node.pending.clear();
    action("ERROR: " + why);
    publish(kError);
  }

  /// Counts one error event against the epoch budget. True if it tripped ERROR.
  bool count_error(const std::string& why) {
    ++s_.error_count;
    if (s_.error_count > s_.config.max_errors) {
      enter_error(why + " (error " + std::to_string(s_.error_count) + " exceeds limit " +
                  std::to_string(s_.config.max_errors) + ")");
      return true;
    }
    log(why + " (error " + std::to_string(s_.error_count) + " of " +
        std::to_string(s_.config.max_errors) + " tolerated)");
    return false;
  }

  void settle_ready() {
    s_.phase = Coherent{};
    cancel_timer();
    if (s_.aggregate != kReady) {
      s_.aggregate = std::string(kReady);
      action("all active nodes returned to READY");
      publish(kReady);
    }
  }

  void finish_reset(const std::string& why) {
    for (auto& [name, node] : s_.nodes) deactivate(node);
    s_.phase = Coherent{};
    cancel_timer();
    s_.aggregate = std::string(kReady);
    action(why);
    publish(kReady);
  }

  void maybe_finish_reset() {
    auto* r = std::get_if<Resetting>(&s_.phase);
    if (r && r->awaiting.empty()) finish_reset("RESET complete");
  }

  // -- coherence ------------------------------------------------------------

  void advance() {
    for (;;) {
      if (auto* t = std::get_if<InTransition>(&s_.phase)) {
        if (!advance_transition(*t)) return;
      } else if (std::holds_alternative<Coherent>(s_.phase)) {
        if (!advance_coherent()) return;
      } else {
        return;
      }
    }
  }

  /// True if the phase may have more work.
  bool advance_coherent() {
    if (s_.active_count() == 0) {
      if (s_.aggregate != kReady || s_.timer) settle_ready();
      return false;
    }
    for (auto& [name, node] : s_.nodes) {
      if (!node.active || node.pending.empty()) continue;
      auto report = std::move(node.pending.front());
      node.pending.pop_front();
      if (report == kReady) {
        node.last_major = report;
        deactivate(node);
        log(name + " returned to READY");
        return true;
      }
      if (report == current_of(node)) {
        log(name + " repeated " + report);
        return true;
      }
      node.last_major = report;
      s_.phase = InTransition{report, {name}};
      if (!s_.timer) arm_timer(TimerKind::transition);
      action("transition to " + report + " started by " + name);
      return true;
    }
    return false;
  }

  bool advance_transition(InTransition& t) {
    bool progress = false;
    for (auto& [name, node] : s_.nodes) {
      if (!node.active || t.done.count(name)) continue;
      while (!node.pending.empty() && node.active && !t.done.count(name)) {
        auto report = std::move(node.pending.front());
        node.pending.pop_front();
        progress = true;
        if (report == t.target) {
          node.last_major = report;
          t.done.insert(name);
        } else if (report == kReady) {
          node.last_major = report;
          deactivate(node);
          log(name + " returned to READY during transition to " + t.target);
        } else if (report == current_of(node)) {
          log(name + " repeated " + report);
        } else {
          enter_error("conflicting state " + report + " from " + name +
                      " during transition to " + t.target);
          return false;
        }
      }
    }
    if (s_.active_count() == 0) {
      settle_ready();
      return true;
    }
    bool complete = std::all_of(s_.nodes.begin(), s_.nodes.end(), [&](const auto& kv) {
      return !kv.second.active || t.done.count(kv.first);
    });
    if (complete) {
      auto target = t.target;
      s_.aggregate = target;
      s_.phase = Coherent{};
      cancel_timer();
      action("all active nodes reached " + target);
      publish(target);
      return true;
    }
    return progress;
  }

  // -- events ---------------------------------------------------------------

  void on_connect(const std::string& name) {
    if (auto* existing = find(name); existing && existing->connected) {
      log(name + " reconnected over a live session; treating the old one as lost");
      on_disconnect(name);
    }
    auto& node = s_.nodes[name];
    const bool unavailable = node.unavailable;
    node = NodeRecord{};
    node.name = name;
    node.connected = true;
    node.unavailable = unavailable;
    action(name + " connected");
  }

  void on_disconnect(const std::string& name) {
    auto* node = find(name);
    if (!node || !node->connected) {
      log("disconnect from unknown or already disconnected node " + name);
      return;
    }
    const bool was_active = node->active;
    node->connected = false;
    node->dead = true;
    node->unavailable = true;
    deactivate(*node);
    action(name + " disconnected; marked dead and unavailable");

    if (auto* r = std::get_if<Resetting>(&s_.phase)) {
      r->awaiting.erase(name);
      maybe_finish_reset();
      return;
    }
    if (errored() || !was_active) return;
    if (!count_error("active node " + name + " disconnected")) advance();
  }

  void on_report(const Report& e) {
    auto* node = find(e.node);
    if (!node || !node->connected) {
      log("report " + e.state + " from unknown or disconnected node " + e.node + " ignored");
      return;
    }
    node->last_display = DisplayState{e.state, e.cls, e.color, e.detail};
    if (e.cls == ReportClass::minor || e.cls == ReportClass::micro) return;

    if (errored()) {
      if (e.cls == ReportClass::major && e.state == kReady) {
        node->last_major = e.state;
        deactivate(*node);
      }
      log(e.node + " reported " + e.state + " while in ERROR; displayed only");
      return;
    }

    if (auto* r = std::get_if<Resetting>(&s_.phase)) {
      if (e.cls == ReportClass::error) {
        log(e.node + " reported error state " + e.state + " during RESET");
        return;
      }
      node->last_major = e.state;
      if (r->awaiting.count(e.node)) {
        r->awaiting.erase(e.node);
        deactivate(*node);
        if (e.state != kReady) {
          node->unavailable = true;
          action(e.node + " answered RESET with " + e.state + "; marked unavailable");
        }
      } else if (e.state == kReady) {
        deactivate(*node);
      }
      maybe_finish_reset();
      return;
    }

    if (e.cls == ReportClass::error) {
      if (!node->active) {
        log("inactive node " + e.node + " reported error state " + e.state);
        return;
      }
      deactivate(*node);
      if (!count_error(e.node + " reported error state " + e.state)) advance();
      return;
    }

    // Major report outside RESET and ERROR.
    if (node->active) {
      node->pending.push_back(e.state);
      advance();
      return;
    }
    node->last_major = e.state;
    if (e.state == kReady) {
      log(e.node + " is READY");
      return;
    }
    node->unavailable = true;
    action("inactive node " + e.node + " reported " + e.state +
           "; marked unavailable and sent RESET");
    send(e.node, kReset);
  }

  void on_command(const std::string& name) {
    if (name == kReset) {
      handle_reset();
    } else if (errored()) {
      log("command " + name + " dropped: ERROR is latched until RESET");
    } else if (name == kStart) {
      handle_start();
    } else {
      handle_generic(name);
    }
  }

  void handle_start() {
    if (s_.aggregate != kReady || !std::holds_alternative<Coherent>(s_.phase) ||
        s_.active_count() != 0 || s_.timer) {
      log("START refused: manager is not idle in READY");
      return;
    }
    s_.config = s_.next_config;
    s_.error_count = 0;
    std::vector<std::string> available;
    for (const auto& [name, node] : s_.nodes) {
      if (node.available()) available.push_back(name);
    }
    if (static_cast<int>(available.size()) < s_.config.min_nodes) {
      enter_error("START needs " + std::to_string(s_.config.min_nodes) +
                  " available nodes, found " + std::to_string(available.size()));
      return;
    }
    available.resize(std::min<std::size_t>(available.size(),
                                           static_cast<std::size_t>(s_.config.max_nodes)));
    for (const auto& name : available) {
      auto& node = s_.nodes[name];
      node.active = true;
      node.last_major.reset();
      node.pending.clear();
      send(name, kStart);
    }
    arm_timer(TimerKind::command);
    action("START sent to " + std::to_string(available.size()) + " node(s)");
  }

  void handle_reset() {
    s_.config = s_.next_config;
    s_.error_count = 0;
    cancel_timer();
    if (errored()) s_.aggregate = s_.pre_error_aggregate;
    Resetting resetting;
    for (auto& [name, node] : s_.nodes) {
      node.pending.clear();
      if (node.connected) resetting.awaiting.insert(name);
    }
    s_.phase = resetting;
    for (const auto& name : resetting.awaiting) send(name, kReset);
    action("RESET sent to " + std::to_string(resetting.awaiting.size()) + " node(s)");
    if (resetting.awaiting.empty()) {
      finish_reset("RESET complete (no connected nodes)");
      return;
    }
    arm_timer(TimerKind::command);
  }

  void handle_generic(const std::string& name) {
    if (!std::holds_alternative<Coherent>(s_.phase) || s_.aggregate == kReady || s_.timer ||
        s_.active_count() == 0) {
      log("command " + name + " dropped: no coherent operating state to apply it to");
      return;
    }
    int sent = 0;
    for (const auto& [node_name, node] : s_.nodes) {
      if (!node.active) continue;
      send(node_name, name);
      ++sent;
    }
    arm_timer(TimerKind::command);
    action(name + " sent to " + std::to_string(sent) + " active node(s)");
  }

  void on_timer(const TimerFired& e) {
    if (!s_.timer || s_.timer->generation != e.generation || s_.timer->kind != e.kind) {
      log("stale " + std::string(to_string(e.kind)) + " timer #" +
          std::to_string(e.generation) + " ignored");
      return;
    }
    s_.timer.reset();
    if (auto* r = std::get_if<Resetting>(&s_.phase)) {
      auto stragglers = r->awaiting;
      for (const auto& name : stragglers) {
        auto& node = s_.nodes[name];
        node.unavailable = true;
        deactivate(node);
        log(name + " did not return to READY after RESET; marked unavailable");
      }
      r->awaiting.clear();
      finish_reset("RESET complete; " + std::to_string(stragglers.size()) +
                   " unresponsive node(s) marked unavailable");
      return;
    }
    std::string what;
    if (auto* t = std::get_if<InTransition>(&s_.phase)) {
      what = "transition to " + t->target + " timed out (" + std::to_string(t->done.size()) +
             " of " + std::to_string(s_.active_count()) + " active nodes arrived)";
    } else {
      what = "no consistent state change before the command timeout";
    }
    enter_error(what);
  }

  void on_operator(const OperatorAction& e) {
    auto* node = find(e.node);
    if (!node) {
      log("operator " + std::string(to_string(e.kind)) + " on unknown node " + e.node);
      return;
    }
    switch (e.kind) {
      case OperatorActionKind::kill:
        if (!node->connected) {
          log("operator kill on " + e.node + " ignored: not connected");
          return;
        }
        send(e.node, kReset);
        action("operator killed " + e.node);
        break;
      case OperatorActionKind::restart:
        node->unavailable = false;
        if (node->connected) send(e.node, kReset);
        action("operator restarted " + e.node);
        break;
      case OperatorActionKind::clear_unavailable:
        node->unavailable = false;
        action("operator cleared unavailable on " + e.node);
        break;
    }
  }

  void on_config(const ManagerConfig& config) {
    auto reasons = config.validate();
    if (!reasons.empty()) {
      std::string joined;
      for (const auto& r : reasons) joined += (joined.empty() ? "" : "; ") + r;
      log("configuration rejected: " + joined);
      return;
    }
    s_.next_config = config;
    action("configuration accepted; effective at next START or RESET");
  }

  ManagerState& s_;
  Effects out_;
};

}  // namespace

Step ingest(ManagerState state, const ManagerEvent& event) {
  Engine engine(state);
  auto effects = engine.run(event);
  return Step{std::move(state), std::move(effects)};
}

Aggregator::Aggregator(ManagerConfig config) {
  state_.config = config;
  state_.next_config = config;
}

Effects Aggregator::ingest(const ManagerEvent& event) { return Engine(state_).run(event); }

}  // namespace mnsm::core
