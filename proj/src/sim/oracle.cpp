// SPDX-License-Identifier: Apache-2.0

#include "mnsm/sim/oracle.hpp"

#include <algorithm>
#include <map>

namespace mnsm::sim {
namespace {

using core::ReportClass;

const std::string kReady{core::kReady};
const std::string kError{core::kError};
const std::string kStart{core::kStart};
const std::string kReset{core::kReset};

struct Derivation {
  std::vector<std::string> values;  // epoch trajectory so far
  bool conflict = false;
  bool ended = false;        // no participant left
  bool in_progress = false;  // some participant is ahead of the others
  std::set<std::string> active;
};

class Oracle {
 public:
  explicit Oracle(const core::ManagerConfig& config) : cfg_(config) {}

  void feed(const OracleInput& in) {
    switch (in.kind) {
      case OracleInput::Kind::connect: on_connect(in.node); break;
      case OracleInput::Kind::disconnect: on_disconnect(in.node); break;
      case OracleInput::Kind::report: on_report(in.node, in.state, in.cls); break;
      case OracleInput::Kind::command: on_command(in.state); break;
      case OracleInput::Kind::timeout: on_timeout(); break;
    }
  }

  OracleOutcome take() {
    out_.unavailable = unavailable_;
    return std::move(out_);
  }

 private:
  enum class Epoch { idle, running, resetting, errored };

  // -- derivation -----------------------------------------------------------

  Derivation derive() const {
    Derivation d;
    std::size_t p = 0;
    for (;;) {
      std::set<std::string> parts;
      for (const auto& n : participants_) {
        if (dropped_.count(n)) continue;
        const auto& h = history_.at(n);
        auto ready = std::find(h.begin(), h.end(), kReady);
        if (ready == h.end() || p < static_cast<std::size_t>(ready - h.begin())) parts.insert(n);
      }
      if (parts.empty()) {
        d.ended = true;
        return d;
      }
      std::set<std::string> vals;
      // A node that dropped out still pins whatever it had already been
      // counted as reaching.
      for (const auto& n : dropped_) {
        const auto& h = history_.at(n);
        if (h.size() > p) vals.insert(h[p]);
      }
      bool all_reached = true;
      for (const auto& n : parts) {
        const auto& h = history_.at(n);
        if (h.size() > p) {
          vals.insert(h[p]);
        } else {
          all_reached = false;
        }
      }
      if (vals.size() > 1) {
        d.conflict = true;
        return d;
      }
      if (vals.size() == 1 && all_reached) {
        d.values.push_back(*vals.begin());
        ++p;
        continue;
      }
      d.in_progress = vals.size() == 1;
      d.active = parts;
      return d;
    }
  }

  /// Re-derives the epoch and emits whatever the derivation adds.
  void settle() {
    if (epoch_ != Epoch::running) return;
    auto d = derive();
    for (std::size_t i = emitted_; i < d.values.size(); ++i) {
      publish(d.values[i]);
      command_outstanding_ = false;
    }
    // Dropping every node that took part in a publish shortens the
    // derivation; what was already published stays published.
    emitted_ = std::max(emitted_, d.values.size());
    if (d.conflict) {
      error();
      return;
    }
    // Participants that left through READY become ready-and-idle.
    for (const auto& n : active_) {
      if (!d.active.count(n) && !dropped_.count(n)) said_ready_.insert(n);
    }
    active_ = d.active;
    in_progress_ = d.in_progress;
    position_ = d.values.size();
    if (d.ended) {
      if (emitted_ > 0) publish(kReady);
      epoch_ = Epoch::idle;
      command_outstanding_ = false;
      in_progress_ = false;
      active_.clear();
    }
  }

  // -- outputs --------------------------------------------------------------

  void publish(const std::string& s) {
    aggregate_ = s;
    out_.published.push_back(s);
  }
  void send(const std::string& n, const std::string& c) { out_.sends.push_back(n + ":" + c); }

  void error() {
    epoch_ = Epoch::errored;
    active_.clear();
    in_progress_ = false;
    command_outstanding_ = false;
    publish(kError);
  }

  void count_error(const std::string& n) {
    // Keep only the reports the node had been counted for: everything up
    // to the current position, plus the current target if it got there.
    auto& h = history_[n];
    h.resize(std::min(h.size(), position_ + 1));
    dropped_.insert(n);
    active_.erase(n);
    if (++errors_ > cfg_.max_errors) {
      error();
    } else {
      settle();
    }
  }

  void finish_reset() {
    epoch_ = Epoch::idle;
    awaiting_.clear();
    publish(kReady);
  }

  // -- inputs ---------------------------------------------------------------

  void on_connect(const std::string& n) {
    if (connected_.count(n)) on_disconnect(n);
    connected_.insert(n);
    said_ready_.erase(n);
  }

  void on_disconnect(const std::string& n) {
    if (!connected_.count(n)) return;
    connected_.erase(n);
    unavailable_.insert(n);
    said_ready_.erase(n);
    if (epoch_ == Epoch::resetting) {
      awaiting_.erase(n);
      if (awaiting_.empty()) finish_reset();
    } else if (epoch_ == Epoch::running && active_.count(n)) {
      count_error(n);
    }
  }

  void on_report(const std::string& n, const std::string& s, ReportClass cls) {
    if (!connected_.count(n)) return;
    if (cls == ReportClass::minor || cls == ReportClass::micro) return;
    switch (epoch_) {
      case Epoch::errored:
        if (cls == ReportClass::major && s == kReady) said_ready_.insert(n);
        return;
      case Epoch::resetting:
        if (cls == ReportClass::error) return;
        if (s == kReady) {
          said_ready_.insert(n);
        } else {
          said_ready_.erase(n);
        }
        if (awaiting_.erase(n) && s != kReady) unavailable_.insert(n);
        if (awaiting_.empty()) finish_reset();
        return;
      case Epoch::idle:
      case Epoch::running:
        break;
    }
    const bool active = epoch_ == Epoch::running && active_.count(n);
    if (cls == ReportClass::error) {
      if (active) count_error(n);
      return;
    }
    if (active) {
      auto& h = history_[n];
      if (h.empty() || h.back() != s) h.push_back(s);
      settle();
      return;
    }
    if (s == kReady) {
      said_ready_.insert(n);
      return;
    }
    said_ready_.erase(n);
    unavailable_.insert(n);
    send(n, kReset);
  }

  void on_command(const std::string& c) {
    if (c == kReset) {
      errors_ = 0;
      active_.clear();
      in_progress_ = false;
      command_outstanding_ = false;
      epoch_ = Epoch::resetting;
      awaiting_ = connected_;
      for (const auto& n : awaiting_) send(n, kReset);
      if (awaiting_.empty()) finish_reset();
      return;
    }
    if (c == kStart) {
      if (epoch_ != Epoch::idle) return;
      std::vector<std::string> available;
      for (const auto& n : connected_) {
        if (!unavailable_.count(n) && said_ready_.count(n)) available.push_back(n);
      }
      errors_ = 0;
      if (static_cast<int>(available.size()) < cfg_.min_nodes) {
        error();
        return;
      }
      if (static_cast<int>(available.size()) > cfg_.max_nodes) {
        available.resize(static_cast<std::size_t>(cfg_.max_nodes));
      }
      participants_ = available;
      history_.clear();
      for (const auto& n : participants_) history_[n];
      dropped_.clear();
      emitted_ = 0;
      position_ = 0;
      for (const auto& n : participants_) {
        said_ready_.erase(n);
        send(n, kStart);
      }
      active_ = std::set<std::string>(participants_.begin(), participants_.end());
      epoch_ = Epoch::running;
      command_outstanding_ = true;
      in_progress_ = false;
      return;
    }
    if (epoch_ != Epoch::running || in_progress_ || command_outstanding_ || emitted_ == 0) return;
    for (const auto& n : active_) send(n, c);
    command_outstanding_ = true;
  }

  void on_timeout() {
    if (epoch_ == Epoch::resetting) {
      for (const auto& n : awaiting_) unavailable_.insert(n);
      finish_reset();
      return;
    }
    if (epoch_ == Epoch::running && (command_outstanding_ || in_progress_)) error();
  }

  core::ManagerConfig cfg_;
  Epoch epoch_ = Epoch::idle;
  std::string aggregate_ = kReady;
  std::set<std::string> connected_, unavailable_, said_ready_;

  // running epoch
  std::vector<std::string> participants_;
  std::map<std::string, std::vector<std::string>> history_;
  std::set<std::string> dropped_;
  std::set<std::string> active_;
  std::size_t emitted_ = 0;
  std::size_t position_ = 0;  // trajectory index currently being agreed on
  int errors_ = 0;
  bool command_outstanding_ = false;
  bool in_progress_ = false;

  // resetting epoch
  std::set<std::string> awaiting_;

  OracleOutcome out_;
};

}  // namespace

OracleInput OracleInput::connect(std::string node) {
  return OracleInput{Kind::connect, std::move(node), {}, ReportClass::major};
}
OracleInput OracleInput::disconnect(std::string node) {
  return OracleInput{Kind::disconnect, std::move(node), {}, ReportClass::major};
}
OracleInput OracleInput::report(std::string node, std::string state, ReportClass cls) {
  return OracleInput{Kind::report, std::move(node), std::move(state), cls};
}
OracleInput OracleInput::command(std::string name) {
  return OracleInput{Kind::command, {}, std::move(name), ReportClass::major};
}
OracleInput OracleInput::timeout() { return OracleInput{Kind::timeout, {}, {}, ReportClass::major}; }

std::string OracleInput::describe() const {
  switch (kind) {
    case Kind::connect: return node + " connects";
    case Kind::disconnect: return node + " disconnects";
    case Kind::report:
      return node + " reports " + state + " (" + std::string(core::to_string(cls)) + ")";
    case Kind::command: return "controller sends " + state;
    case Kind::timeout: return "timer fires";
  }
  return {};
}

OracleOutcome oracle_aggregate(const std::vector<OracleInput>& inputs,
                               const core::ManagerConfig& config) {
  Oracle oracle(config);
  for (const auto& in : inputs) oracle.feed(in);
  return oracle.take();
}

bool to_oracle_input(const core::ManagerEvent& event, OracleInput& out) {
  if (auto* e = std::get_if<core::NodeConnected>(&event)) {
    out = OracleInput::connect(e->node);
  } else if (auto* e = std::get_if<core::NodeDisconnected>(&event)) {
    out = OracleInput::disconnect(e->node);
  } else if (auto* e = std::get_if<core::Report>(&event)) {
    out = OracleInput::report(e->node, e->state, e->cls);
  } else if (auto* e = std::get_if<core::ControllerCommand>(&event)) {
    out = OracleInput::command(e->name);
  } else if (std::holds_alternative<core::TimerFired>(event)) {
    out = OracleInput::timeout();
  } else {
    return false;
  }
  return true;
}

}  // namespace mnsm::sim
