// slicelab: run the slice reconfiguration experiments from the command line.
//
//   slicelab run      --scenario FILE --out DIR --seeds 1:10
//   slicelab compare  --scenario FILE --out DIR --seeds 1,2,3
//   slicelab validate --scenario FILE
//
// Exit status: 0 success, 2 bad scenario or arguments, 1 anything else.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "slicelab/errors.hpp"
#include "slicelab/experiment.hpp"
#include "slicelab/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace slicelab;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitBadInput = 2;

struct Options {
  std::string scenario;  // empty = built-in reference scenario
  std::string out;
  std::string seeds;
  std::string transfer_rule;
  std::string statistic;
  unsigned threads = 0;
  bool dry_run = false;
  bool trace = false;
};

// "1,2,5" or an inclusive range "1:10".
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  auto to_u64 = [&](const std::string& s) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || s.front() == '-') throw ParseError("--seeds", fmt::format("bad seed '{}'", s));
    return static_cast<std::uint64_t>(v);
  };
  if (auto colon = text.find(':'); colon != std::string::npos) {
    auto lo = to_u64(text.substr(0, colon));
    auto hi = to_u64(text.substr(colon + 1));
    if (hi < lo) throw ParseError("--seeds", fmt::format("empty range '{}'", text));
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  std::stringstream in(text);
  for (std::string part; std::getline(in, part, ',');) out.push_back(to_u64(part));
  if (out.empty()) throw ParseError("--seeds", "no seeds given");
  return out;
}

ScenarioConfig load(const Options& o) {
  ScenarioConfig c = o.scenario.empty() ? reference_scenario() : load_scenario_file(o.scenario);
  if (!o.seeds.empty()) c.seeds = parse_seeds(o.seeds);
  if (!o.transfer_rule.empty()) {
    try {
      c.osra.transfer_rule = parse_transfer_rule(o.transfer_rule);
    } catch (const std::invalid_argument& e) {
      throw ParseError("--transfer-rule", e.what());
    }
  }
  if (!o.statistic.empty()) {
    try {
      c.statistic = DelayStatistic::parse(o.statistic);
    } catch (const std::invalid_argument& e) {
      throw ParseError("--statistic", e.what());
    }
  }
  validate_scenario_config(c);
  return c;
}

fs::path out_dir(const Options& o) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv("SLICELAB_OUT"); env && *env) return env;
  return "slicelab-out";
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw Error(fmt::format("cannot write {}", path.string()));
  return f;
}

int cmd_run(const Options& o) {
  const auto config = load(o);
  if (o.dry_run) {
    std::cout << to_yaml(config);
    return 0;
  }
  const fs::path dir = out_dir(o);
  fs::create_directories(dir);

  auto runs = run_seeds(config, config.seeds, o.threads);
  for (const auto& r : runs) {
    const fs::path seed_dir = dir / fmt::format("seed_{}", r.seed);
    fs::create_directories(seed_dir);
    auto it = open_csv(seed_dir / "iterations.csv");
    write_iterations_csv(it, config, r);
    auto fa = open_csv(seed_dir / "final_alloc.csv");
    write_final_alloc_csv(fa, config, r.osra.final_alloc);
    auto q = open_csv(seed_dir / "qoe_per_iter.csv");
    write_qoe_csv(q, r);
    if (o.trace) {
      SimConfig sim = config.sim;
      sim.seed = r.seed;
      sim.keep_trace = true;
      auto result = run_sim(config.scenario, r.osra.final_alloc, sim);
      auto t = open_csv(seed_dir / "trace.csv");
      write_trace_csv(t, result.trace);
    }
  }
  const auto agg = aggregate_qoe(runs);
  auto a = open_csv(dir / "aggregate.csv");
  write_aggregate_csv(a, agg);
  auto s = open_csv(dir / "summary.csv");
  write_summary_csv(s, runs);

  int converged = 0;
  for (const auto& r : runs) {
    converged += r.osra.converged ? 1 : 0;
    fmt::print("seed {}: {} after {} iterations ({:.2f} s)\n", r.seed, r.osra.converged ? "converged" : "not converged",
               r.osra.iterations, r.seconds);
  }
  fmt::print("{}/{} seeds converged; results in {}\n", converged, runs.size(), dir.string());
  return 0;
}

int cmd_compare(const Options& o) {
  const auto config = load(o);
  if (o.dry_run) {
    std::cout << to_yaml(config);
    return 0;
  }
  const fs::path dir = out_dir(o);
  fs::create_directories(dir);
  auto rep = run_compare(config, config.seeds, o.threads);
  auto c = open_csv(dir / "compare.csv");
  write_compare_csv(c, rep.rows);
  auto h = open_csv(dir / "histogram.csv");
  write_histogram_csv(h, rep.histograms);
  auto b = open_csv(dir / "baseline_alloc.csv");
  write_final_alloc_csv(b, config, rep.baseline.alloc);

  for (const auto& r : rep.rows) {
    if (r.seed && config.seeds.size() > 1) continue;
    fmt::print("{:5} slice {}: violation {:.4f}  mean delay {:.3f} ms  throughput {:.4f}{}\n", r.method, r.slice,
               r.evaluation.violation_fraction, r.evaluation.mean_delay_ms, r.evaluation.throughput,
               r.clamped ? "  (clamped)" : "");
  }
  fmt::print("results in {}\n", dir.string());
  return 0;
}

int cmd_validate(const Options& o) {
  const auto config = load(o);
  fmt::print("scenario ok: {} slices, {} edges, {} cores, new slice {}\n", config.scenario.slices.size(),
             config.scenario.topology.edges.size(), config.scenario.topology.cores.size(), config.new_slice);
  if (o.dry_run) std::cout << to_yaml(config);
  return 0;
}

void add_common(CLI::App* cmd, Options& o, bool experiment) {
  cmd->add_option("--scenario", o.scenario, "Scenario YAML file (default: built-in reference scenario)");
  cmd->add_flag("--dry-run", o.dry_run, "Validate and print the resolved configuration without simulating");
  cmd->add_option("--seeds", o.seeds, "Seeds, e.g. 1,2,3 or 1:10 (overrides the scenario's list)");
  cmd->add_option("--transfer-rule", o.transfer_rule, "algorithm1 or conservative");
  cmd->add_option("--statistic", o.statistic, "Delay statistic for the probed slice: max, mean, p95, percentile(x)");
  if (experiment) {
    cmd->add_option("--out", o.out, "Output directory (default: $SLICELAB_OUT or ./slicelab-out)");
    cmd->add_option("--threads", o.threads, "Worker threads, 0 = all cores (results do not depend on it)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online network slice reconfiguration experiments"};
  app.require_subcommand(1);
  Options o;
  auto* run = app.add_subcommand("run", "Run the reconfiguration per seed and write traces");
  add_common(run, o, true);
  run->add_flag("--trace", o.trace, "Also write a per-request trace of the final allocation");
  auto* compare = app.add_subcommand("compare", "Compare against M/M/1 sizing on identical seeds");
  add_common(compare, o, true);
  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  add_common(validate, o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitBadInput;
  }

  try {
    if (*run) return cmd_run(o);
    if (*compare) return cmd_compare(o);
    return cmd_validate(o);
  } catch (const ParseError& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return kExitBadInput;
  } catch (const InvariantViolation& e) {
    fmt::print(std::cerr, "error: invalid scenario\n");
    for (const auto& v : e.violations()) fmt::print(std::cerr, "  {}\n", v);
    return kExitBadInput;
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return kExitFailure;
  }
}
