#pragma once

// Experiment harness shared by the command-line tool, the acceptance suite
// and the benchmarks: the built-in three-slice reference scenario, per-seed
// reconfiguration runs with whole-system monitoring, the method comparison,
// and the CSV writers for all of it.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slicelab/baseline.hpp"
#include "slicelab/osra.hpp"
#include "slicelab/scenario_io.hpp"

namespace slicelab {

// The three-slice setup: a delay-critical new slice (id 1), an enhanced
// broadband slice (id 2) and a best-effort slice (id 3) on a two-hop path
// into a two-core server. scenarios/reference.yaml holds the same values.
ScenarioConfig reference_scenario();

// Whole-system QoE of one slice at one allocation, from a full simulation.
struct SliceQoe {
  SliceId slice = 0;
  std::size_t offered = 0;
  double mean_delay_ms = kUnbounded;
  double max_delay_ms = kUnbounded;
  double throughput = 1.0;
  double violation_fraction = 0.0;
  double max_delay_violation_ms = 0.0;  // max(0, max delay - tau); 0 for best effort
};

SliceQoe slice_qoe(const SliceSpec& slice, const SliceEvaluation& evaluation);

struct SeedRun {
  std::uint64_t seed = 0;
  OsraResult osra;
  // qoe[k] is the system at s(k), for k = 0 .. osra.iterations; the last
  // entry is the final allocation.
  std::vector<std::vector<SliceQoe>> qoe;
  double seconds = 0.0;  // wall time of this seed
};

// Runs the reconfiguration from the scenario's initial allocation. Probes
// of the new slice use the simulation oracle with the configured statistic;
// the other slices use the analytic model. With `monitor`, every visited
// allocation is simulated in full with the run seed.
SeedRun run_seed(const ScenarioConfig& config, std::uint64_t seed, bool monitor = true);

// Seeds run concurrently on up to `threads` workers (0 = hardware).
std::vector<SeedRun> run_seeds(const ScenarioConfig& config, std::span<const std::uint64_t> seeds,
                               unsigned threads = 0, bool monitor = true);

// Mean over seeds of each slice's QoE at each iteration. Runs that stopped
// early keep contributing their final state to later iterations.
struct AggregateRow {
  int k = 0;
  SliceId slice = 0;
  std::size_t n_seeds = 0;
  double mean_delay_ms = 0.0;
  double max_delay_ms = 0.0;
  double throughput = 0.0;
  double violation_fraction = 0.0;
  double max_delay_violation_ms = 0.0;
};

std::vector<AggregateRow> aggregate_qoe(std::span<const SeedRun> runs);

struct CompareRow {
  std::string method;               // "osra" or "mm1"
  SliceId slice = 0;
  std::optional<std::uint64_t> seed;  // empty for the pooled row
  SliceEvaluation evaluation;
  bool clamped = false;             // baseline demand exceeded a whole resource
};

struct CompareHistogram {
  std::string method;
  SliceId slice = 0;
  Histogram histogram;
};

struct CompareReport {
  std::vector<CompareRow> rows;
  std::vector<CompareHistogram> histograms;  // pooled over seeds
  std::vector<SeedRun> runs;                 // the reconfiguration runs behind the "osra" rows
  BaselinePlan baseline;
};

// Both methods are simulated on identical seeds. Pooled rows are added only
// when there is more than one seed.
CompareReport run_compare(const ScenarioConfig& config, std::span<const std::uint64_t> seeds, unsigned threads = 0);

// CSV writers; docs/file_formats.md lists every column.
void write_iterations_csv(std::ostream& out, const ScenarioConfig& config, const SeedRun& run);
void write_final_alloc_csv(std::ostream& out, const ScenarioConfig& config, const AllocationMatrix& alloc);
void write_qoe_csv(std::ostream& out, const SeedRun& run);
void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows);
void write_summary_csv(std::ostream& out, std::span<const SeedRun> runs);
void write_compare_csv(std::ostream& out, std::span<const CompareRow> rows);
void write_histogram_csv(std::ostream& out, std::span<const CompareHistogram> histograms);

}  // namespace slicelab
