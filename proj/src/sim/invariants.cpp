// SPDX-License-Identifier: Apache-2.0

#include "mnsm/sim/invariants.hpp"

namespace mnsm::sim {

using namespace mnsm::core;

std::optional<std::string> check_state(const ManagerState& s) {
  for (const auto& [name, n] : s.nodes) {
    if (n.unavailable && n.active) return name + ": unavailable but active";
    if (n.dead && n.connected) return name + ": dead but connected";
    if (n.active && !n.connected) return name + ": active but not connected";
    if (n.active && n.last_major == kReady) return name + ": last major READY but active";
    if (!n.active && !n.pending.empty()) return name + ": inactive with pending reports";
  }
  const bool errored = std::holds_alternative<Errored>(s.phase);
  if (errored != (s.aggregate == kError)) return "errored phase and ERROR aggregate disagree";
  if (std::holds_alternative<Coherent>(s.phase)) {
    for (const auto& [name, n] : s.nodes) {
      if (n.active && n.last_major.value_or(s.aggregate) != s.aggregate) {
        return "coherent but " + name + " last reported " + *n.last_major + " under aggregate " +
               s.aggregate;
      }
    }
  }
  if (const auto* t = std::get_if<InTransition>(&s.phase)) {
    if (t->target == kReady || t->target == kError) return "transition targets " + t->target;
    for (const auto& d : t->done) {
      auto it = s.nodes.find(d);
      if (it == s.nodes.end() || !it->second.active) return "done set holds inactive " + d;
    }
  }
  if (s.timer && s.timer->generation > s.timer_generation) return "timer generation from the future";
  if (s.error_count < 0) return "negative error count";
  return std::nullopt;
}

std::optional<std::string> InvariantMonitor::observe(const ManagerEvent& event,
                                                     const ManagerState& after,
                                                     const Effects& effects) {
  std::optional<std::string> violation;
  auto flag = [&](std::string why) {
    if (!violation) violation = std::move(why);
  };

  const auto* command = std::get_if<ControllerCommand>(&event);
  const bool exempt = std::holds_alternative<OperatorAction>(event);
  if (command && command->name == kReset) latched_ = false;
  if (const auto* r = std::get_if<Report>(&event); r && r->cls == ReportClass::major) {
    reported_majors_.insert(r->state);
  }

  std::set<std::uint64_t> cancelled_now;
  for (const auto& effect : effects) {
    if (const auto* st = std::get_if<SetTimer>(&effect)) {
      if (!ever_set_.insert(st->generation).second) flag("timer generation reused");
      open_timers_.insert(st->generation);
    } else if (const auto* ct = std::get_if<CancelTimer>(&effect)) {
      if (!open_timers_.erase(ct->generation)) flag("cancel of a timer that is not open");
      cancelled_now.insert(ct->generation);
    } else if (const auto* p = std::get_if<PublishAggregate>(&effect)) {
      if (p->state == kError) {
        latched_ = true;
      } else if (p->state != kReady && !reported_majors_.count(p->state)) {
        flag("published " + p->state + " which no daemon reported");
      }
    } else if (const auto* send = std::get_if<SendToNode>(&effect)) {
      if (latched_ && !exempt) flag("sent " + send->command + " to " + send->node + " while in ERROR");
    }
  }

  if (const auto* tf = std::get_if<TimerFired>(&event)) {
    const bool still_armed = after.timer && after.timer->generation == tf->generation;
    if (open_timers_.count(tf->generation) && !still_armed) open_timers_.erase(tf->generation);
  }
  if (after.timer && !open_timers_.count(after.timer->generation)) flag("armed timer was never set");
  if (!after.timer && !open_timers_.empty()) flag("timer left open with nothing armed");

  if (auto s = check_state(after)) flag(*s);
  return violation;
}

}  // namespace mnsm::sim
