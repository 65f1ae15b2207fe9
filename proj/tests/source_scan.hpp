// SPDX-License-Identifier: Apache-2.0
//
// Looks for application vocabulary (state names, commands, machine names
// from the demo machines) in the application-agnostic sources.

#pragma once

#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "mnsm/machine/spec.hpp"

namespace mnsm::test {

struct SourceHit {
  std::string file;
  int line = 0;
  std::string word;
};

/// Names the manager legitimately knows: the shared idle and error states
/// and the protocol commands.
inline bool protocol_name(const std::string& w) {
  return w == "READY" || w == "ERROR" || w == "START" || w == "RESET";
}

inline std::set<std::string> demo_vocabulary() {
  std::set<std::string> words;
  for (const auto& e : std::filesystem::directory_iterator(MNSM_DEMO_DIR)) {
    if (e.path().extension() != ".sm") continue;
    auto spec = machine::load_spec_file(e.path().string());
    words.insert(spec.name);
    for (const auto& s : spec.states) words.insert(s.name);
    for (const auto& r : spec.rules) {
      if (r.trigger.kind != machine::Trigger::Kind::exit) words.insert(r.trigger.name);
    }
  }
  for (auto it = words.begin(); it != words.end();) {
    it = (it->empty() || protocol_name(*it)) ? words.erase(it) : std::next(it);
  }
  return words;
}

inline std::vector<SourceHit> scan_sources(const std::set<std::string>& words) {
  const std::string root = MNSM_SOURCE_DIR;
  std::vector<SourceHit> hits;
  // Whole words only, so "ready" inside "already" does not count.
  std::vector<std::pair<std::string, std::regex>> patterns;
  for (const auto& w : words) {
    patterns.emplace_back(w, std::regex("(^|[^A-Za-z0-9_-])" + w + "($|[^A-Za-z0-9_-])"));
  }
  for (const auto* dir : {"src/core", "src/manager", "include/mnsm/core", "include/mnsm/manager"}) {
    for (const auto& e : std::filesystem::recursive_directory_iterator(root + "/" + dir)) {
      if (!e.is_regular_file()) continue;
      std::ifstream in(e.path());
      std::string text;
      int n = 0;
      while (std::getline(in, text)) {
        ++n;
        for (const auto& [w, re] : patterns) {
          if (std::regex_search(text, re)) hits.push_back({e.path().string(), n, w});
        }
      }
    }
  }
  return hits;
}

}  // namespace mnsm::test
