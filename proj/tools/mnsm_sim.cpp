// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mnsm/sim/enumerate.hpp"
#include "mnsm/sim/runner.hpp"
#include "mnsm/sim/trace.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string joined(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : " ") + s;
  return out;
}

int run(const std::string& path, const std::optional<std::string>& trace_out,
        std::optional<std::uint64_t> seed) {
  auto scenario = mnsm::sim::load_scenario(path);
  if (seed) scenario.seed = *seed;
  auto t0 = std::chrono::steady_clock::now();
  auto result = mnsm::sim::run_scenario(scenario);
  auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  auto published = result.published();
  std::cout << "scenario   " << scenario.name << '\n'
            << "events     " << result.trace.records.size() << '\n'
            << "end tick   " << result.end_time << (result.hit_time_limit ? " (time limit)" : "") << '\n'
            << "aggregate  " << result.final_state.aggregate << '\n'
            << "published  " << joined(published) << '\n'
            << "wall       " << ms << " ms\n";
  if (trace_out) {
    std::ofstream out(*trace_out);
    out << result.trace.to_jsonl();
    if (!out) throw std::runtime_error("cannot write " + *trace_out);
  }
  if (scenario.expect_published && *scenario.expect_published != published) {
    std::cout << "expected   " << joined(*scenario.expect_published) << "\nFAIL\n";
    return 2;
  }
  return 0;
}

int enumerate(const std::string& path, std::uint64_t guard) {
  auto c = mnsm::sim::enumeration_case_from_json(nlohmann::json::parse(slurp(path)));
  auto t0 = std::chrono::steady_clock::now();
  auto r = mnsm::sim::enumerate_interleavings(c, guard);
  auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "interleavings  " << r.interleavings << '\n'
            << "mismatches     " << r.mismatches << '\n'
            << "invariants     " << r.invariant_violations << '\n'
            << "latch breaks   " << r.latch_breaks << '\n'
            << "wall           " << ms << " ms\n";
  for (const auto& [seq, n] : r.outcomes) std::cout << "  " << n << "x  [" << joined(seq) << "]\n";
  if (r.first_counterexample) {
    const auto& ce = *r.first_counterexample;
    std::cout << "counterexample: " << ce.reason << '\n';
    for (const auto& s : ce.steps) std::cout << "  " << s << '\n';
    std::cout << "  core   [" << joined(ce.core_published) << "]\n"
              << "  oracle [" << joined(ce.oracle_published) << "]\n";
  }
  return r.clean() ? 0 : 2;
}

int replay(const std::string& path) {
  auto trace = mnsm::sim::Trace::from_jsonl(slurp(path));
  auto r = mnsm::sim::replay(trace);
  std::cout << "records " << r.records << '\n';
  if (r.ok()) {
    std::cout << "identical\n";
    return 0;
  }
  std::cout << "diverged at record " << *r.first_mismatch << ": " << r.detail << '\n';
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mnsm deterministic simulator"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run a scenario under virtual time");
  std::string scenario_path;
  std::optional<std::string> trace_out;
  std::optional<std::uint64_t> seed;
  run_cmd->add_option("scenario", scenario_path, "scenario JSON")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--trace", trace_out, "write the JSONL trace here");
  run_cmd->add_option("--seed", seed, "override the scenario seed");

  auto* enum_cmd = app.add_subcommand("enumerate", "check every interleaving against the oracle");
  std::string case_path;
  std::uint64_t guard = mnsm::sim::kInterleavingGuard;
  enum_cmd->add_option("case", case_path, "enumeration case JSON")->required()->check(CLI::ExistingFile);
  enum_cmd->add_option("--guard", guard, "refuse cases with more interleavings than this");

  auto* replay_cmd = app.add_subcommand("replay", "re-run a trace and compare every effect");
  std::string trace_path;
  replay_cmd->add_option("trace", trace_path, "JSONL trace")->required()->check(CLI::ExistingFile);
  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run(scenario_path, trace_out, seed);
    if (*enum_cmd) return enumerate(case_path, guard);
    return replay(trace_path);
  } catch (const std::exception& e) {
    std::cerr << "mnsm-sim: " << e.what() << '\n';
    return 1;
  }
}
