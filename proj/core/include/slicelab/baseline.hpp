#pragma once

// The known-demand comparison method: size every slice from two-stage
// M/M/1 mean-delay formulas, then measure that allocation under the
// simulator to see how often the real (bursty) delays break the bound.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "slicelab/domain.hpp"
#include "slicelab/simulator.hpp"

namespace slicelab {

struct Mm1Demand {
  AllocationVector alloc;
  std::vector<double> link_rates;  // required service rates, req/s
  double server_rate = 0.0;
  bool clamped = false;  // some entry needed more than the whole resource
};

// The network stages share tau * budget_split of the delay budget equally,
// the server gets the rest; each stage gets mu = lambda + 1 / W. Best-effort
// slices get mu = lambda * (1 + margin) everywhere.
Mm1Demand mm1_demand(const SliceSpec& slice, const Topology& topology, double budget_split = 0.5,
                     double margin = 0.1);

struct BaselinePlan {
  AllocationMatrix alloc;
  std::map<SliceId, bool> clamped;
  bool over_capacity = false;  // rows summed past a capacity and were projected
};

BaselinePlan baseline_allocation(const Scenario& scenario, double budget_split = 0.5, double margin = 0.1);

struct Histogram {
  double bin_width_ms = 0.5;
  std::vector<std::size_t> counts;  // bin b covers [b*w, (b+1)*w)
};

Histogram delay_histogram(std::span<const double> delays_ms, double bin_width_ms);

struct SliceEvaluation {
  SliceId slice = 0;
  std::size_t offered = 0;
  std::size_t succeeded = 0;
  std::size_t violations = 0;     // successes with delay > tau
  double violation_fraction = 0.0;
  bool empty = false;             // no successful requests; fraction reported as 0
  double mean_delay_ms = kUnbounded;
  double max_delay_ms = kUnbounded;
  double throughput = 1.0;
  std::vector<double> delays_ms;  // pooled successful delays
};

struct AllocationEvaluation {
  std::vector<SliceEvaluation> pooled;
  std::map<std::uint64_t, std::vector<SliceEvaluation>> per_seed;

  const SliceEvaluation& at(SliceId id) const;
};

SliceEvaluation evaluate_slice(const SliceSpec& slice, std::span<const SliceRunResult* const> runs);

// Simulates the allocation once per seed and reports per-slice violation
// statistics both per seed and pooled over all seeds.
AllocationEvaluation evaluate_allocation(const Scenario& scenario, const AllocationMatrix& alloc,
                                         const SimConfig& config, std::span<const std::uint64_t> seeds,
                                         unsigned threads = 1);

struct BaselineReport {
  BaselinePlan plan;
  AllocationEvaluation evaluation;
};

BaselineReport evaluate_baseline(const Scenario& scenario, const SimConfig& config,
                                 std::span<const std::uint64_t> seeds, double budget_split = 0.5,
                                 unsigned threads = 1);

}  // namespace slicelab
