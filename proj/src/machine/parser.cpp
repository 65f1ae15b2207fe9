// SPDX-License-Identifier: Apache-2.0
//
// Line-oriented spec-file grammar:
//
//   machine <NAME>
//   state <NAME> class=<major|minor|micro|error> color=<word> [initial]
//   trans <FROM|*> on <trigger> [do <action>[,<action>]*] -> <TO>
//
//   trigger := command <NAME> | exit <0..255|nonzero|any> | event <NAME> | disconnect

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "mnsm/machine/spec.hpp"

namespace mnsm::machine {
namespace {

using Kind = ParseError::Kind;

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> tokens;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

bool is_state_name(std::string_view s) {
  if (s.empty() || !std::isupper(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isupper(static_cast<unsigned char>(c)) ||
           std::isdigit(static_cast<unsigned char>(c)) || c == '_';
  });
}

bool is_word(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
           c == '.';
  });
}

class Parser {
 public:
  MachineSpec run(std::string_view text) {
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      ++line_no;
      auto line = text.substr(pos, end - pos);
      if (auto hash = line.find('#'); hash != std::string_view::npos) {
        line = line.substr(0, hash);
      }
      line_ = line_no;
      parse_line(tokenize(line));
      pos = end + 1;
    }
    validate();
    return std::move(spec_);
  }

 private:
  [[noreturn]] void fail(Kind kind, const std::string& what) const {
    throw ParseError(kind, line_, what);
  }

  void parse_line(const std::vector<std::string>& t) {
    if (t.empty()) return;
    if (t[0] == "machine") {
      if (t.size() != 2 || !is_word(t[1])) fail(Kind::syntax, "expected 'machine <NAME>'");
      if (!spec_.name.empty()) fail(Kind::syntax, "machine declared twice");
      spec_.name = t[1];
    } else if (t[0] == "state") {
      parse_state(t);
    } else if (t[0] == "trans") {
      parse_trans(t);
    } else {
      fail(Kind::syntax, "unknown directive '" + t[0] + "'");
    }
  }

  void parse_state(const std::vector<std::string>& t) {
    if (t.size() < 4 || t.size() > 5) {
      fail(Kind::syntax, "expected 'state <NAME> class=<c> color=<w> [initial]'");
    }
    StateDescriptor s;
    s.name = t[1];
    if (!is_state_name(s.name)) fail(Kind::syntax, "bad state name '" + s.name + "'");
    if (t[2].rfind("class=", 0) != 0) fail(Kind::syntax, "expected class=");
    auto cls = parse_state_class(std::string_view(t[2]).substr(6));
    if (!cls) fail(Kind::syntax, "unknown state class '" + t[2].substr(6) + "'");
    s.cls = *cls;
    if (t[3].rfind("color=", 0) != 0) fail(Kind::syntax, "expected color=");
    s.color = t[3].substr(6);
    if (s.color.empty()) fail(Kind::syntax, "empty color");
    if (t.size() == 5) {
      if (t[4] != "initial") fail(Kind::syntax, "unexpected token '" + t[4] + "'");
      s.is_initial = true;
    }
    if (spec_.find_state(s.name)) {
      fail(Kind::duplicate_state, "state " + s.name + " declared twice");
    }
    spec_.states.push_back(std::move(s));
  }

  void parse_trans(const std::vector<std::string>& t) {
    // trans FROM on <trigger...> [do a,b] -> TO
    if (t.size() < 5 || t[2] != "on") fail(Kind::syntax, "expected 'trans <FROM> on ...'");
    auto arrow = std::find(t.begin(), t.end(), "->");
    if (arrow == t.end() || arrow + 2 != t.end()) {
      fail(Kind::syntax, "expected '-> <TO>' at end of rule");
    }
    TransitionRule rule;
    rule.line = line_;
    if (t[1] != "*") {
      if (!is_state_name(t[1])) fail(Kind::syntax, "bad state name '" + t[1] + "'");
      rule.from = t[1];
    }
    rule.to = *(arrow + 1);
    if (!is_state_name(rule.to)) fail(Kind::syntax, "bad state name '" + rule.to + "'");

    auto do_it = std::find(t.begin() + 3, arrow, "do");
    rule.trigger = parse_trigger({t.begin() + 3, do_it});
    if (do_it != arrow) {
      std::string joined;
      for (auto it = do_it + 1; it != arrow; ++it) joined += *it;
      if (joined.empty()) fail(Kind::syntax, "empty action list");
      std::size_t pos = 0;
      while (pos <= joined.size()) {
        auto comma = joined.find(',', pos);
        if (comma == std::string::npos) comma = joined.size();
        auto name = joined.substr(pos, comma - pos);
        auto action = parse_action(name);
        if (!action) fail(Kind::syntax, "unknown action '" + name + "'");
        rule.actions.push_back(*action);
        pos = comma + 1;
      }
    }
    for (const auto& other : spec_.rules) {
      if (other.from == rule.from && other.trigger == rule.trigger) {
        fail(Kind::duplicate_exact_rule,
             "rule for " + rule.from.value_or("*") + " on " + rule.trigger.describe() +
                 " already declared on line " + std::to_string(other.line));
      }
    }
    spec_.rules.push_back(std::move(rule));
  }

  TriggerPattern parse_trigger(const std::vector<std::string>& t) {
    TriggerPattern p;
    if (t.empty()) fail(Kind::syntax, "missing trigger");
    if (t[0] == "disconnect") {
      if (t.size() != 1) fail(Kind::syntax, "disconnect takes no argument");
      p.kind = Trigger::Kind::disconnect;
      return p;
    }
    if (t.size() != 2) fail(Kind::syntax, "trigger '" + t[0] + "' takes one argument");
    if (t[0] == "command") {
      if (!is_state_name(t[1])) fail(Kind::syntax, "bad command name '" + t[1] + "'");
      p.kind = Trigger::Kind::command;
      p.name = t[1];
    } else if (t[0] == "event") {
      if (!is_word(t[1])) fail(Kind::syntax, "bad event name '" + t[1] + "'");
      p.kind = Trigger::Kind::event;
      p.name = t[1];
    } else if (t[0] == "exit") {
      p.kind = Trigger::Kind::exit;
      if (t[1] == "nonzero") {
        p.exit_match = TriggerPattern::ExitMatch::nonzero;
      } else if (t[1] == "any") {
        p.exit_match = TriggerPattern::ExitMatch::any;
      } else {
        int code = -1;
        auto [ptr, ec] = std::from_chars(t[1].data(), t[1].data() + t[1].size(), code);
        if (ec != std::errc{} || ptr != t[1].data() + t[1].size() || code < 0 ||
            code > 255) {
          fail(Kind::syntax, "exit code must be 0..255, nonzero or any");
        }
        p.code = code;
      }
    } else {
      fail(Kind::syntax, "unknown trigger '" + t[0] + "'");
    }
    return p;
  }

  void validate() {
    line_ = 0;
    if (spec_.name.empty()) fail(Kind::syntax, "missing 'machine <NAME>'");
    const StateDescriptor* initial = nullptr;
    for (const auto& s : spec_.states) {
      if (!s.is_initial) continue;
      if (initial) fail(Kind::no_initial_ready, "more than one initial state");
      initial = &s;
    }
    if (!initial || initial->name != kReadyState || initial->cls != StateClass::major) {
      fail(Kind::no_initial_ready, "the initial state must be READY with class=major");
    }
    for (const auto& r : spec_.rules) {
      line_ = r.line;
      if (r.from && !spec_.find_state(*r.from)) {
        fail(Kind::undeclared_target_state, "undeclared state " + *r.from);
      }
      if (!spec_.find_state(r.to)) {
        fail(Kind::undeclared_target_state, "undeclared state " + r.to);
      }
    }
  }

  MachineSpec spec_;
  int line_ = 0;
};

}  // namespace

MachineSpec parse_spec(std::string_view text) { return Parser{}.run(text); }

MachineSpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

}  // namespace mnsm::machine
