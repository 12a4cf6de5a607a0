#pragma once

// Online slice reconfiguration: projected gradient steps that move
// resources from lower-priority slices to a newly admitted slice whose
// penalty gradient is only available through noisy probing.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slicelab/domain.hpp"
#include "slicelab/oracle.hpp"
#include "slicelab/penalty.hpp"

namespace slicelab {

enum class StepSchedule {
  Constant,     // eta
  InverseSqrt,  // eta / sqrt(k + 1)
  Normalized,   // eta / max(|g_i|, 1): moves at most eta per slice per step
};

enum class TransferRule {
  Algorithm1,    // s_j += sum_i eta_i g_i / |g_j|
  Conservative,  // s_j += sum_i eta_i g_i, exactly what the others gave up
};

// Which gradient a lower-priority slice descends along.
enum class GradientCoupling {
  // grad pi_i(s_i) - grad pi_j(s_j): change of the total penalty when a unit
  // of resource moves from slice i to the new slice j.
  Exchange,
  // grad pi_i(s_i) alone.
  Own,
};

std::string to_string(StepSchedule s);
std::string to_string(TransferRule r);
std::string to_string(GradientCoupling c);
StepSchedule parse_step_schedule(const std::string& text);
TransferRule parse_transfer_rule(const std::string& text);
GradientCoupling parse_gradient_coupling(const std::string& text);

struct OsraConfig {
  double eta = 0.05;
  std::map<SliceId, double> eta_by_slice;  // overrides eta for individual slices
  StepSchedule schedule = StepSchedule::Constant;
  double delta = 0.02;           // probe offset for the new slice
  int probes = 10;               // repetitions per probe point
  double epsilon = 1e-3;
  int max_iters = 50;
  TransferRule transfer_rule = TransferRule::Algorithm1;
  GradientCoupling coupling = GradientCoupling::Exchange;
  double analytic_delta = 1e-4;  // finite-difference offset on the analytic oracle
  // Share probe seeds across coordinates and sides within an iteration.
  bool common_random_numbers = true;
  unsigned threads = 1;          // probe concurrency; never changes results

  double eta_for(SliceId id) const;
  bool operator==(const OsraConfig&) const = default;
};

// Throws InvariantViolation listing every bad field.
void check_osra_config(const OsraConfig& config);

// Append-only record of every probe taken for the new slice.
class ProbeMemory {
 public:
  void append(std::vector<ProbeRecord> records);
  const std::vector<ProbeRecord>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  // Re-evaluates every recorded point with its seed; true iff all samples match.
  bool replay(const PointEvaluator& oracle) const;

 private:
  std::vector<ProbeRecord> entries_;
};

struct IterationTrace {
  int k = 0;
  AllocationMatrix alloc;  // s(k), where gradients were taken
  std::map<SliceId, QoeSample> qoe;
  std::map<SliceId, double> penalty;
  std::map<SliceId, std::vector<double>> gradient;       // each slice's own penalty gradient
  std::map<SliceId, std::vector<double>> step_gradient;  // g_i used in the update (lower-priority slices)
  std::map<SliceId, double> eta;
  std::vector<double> transfer;  // sum_i eta_i g_i
  double stop_metric = 0.0;      // |transfer|
  bool converged = false;        // stop_metric <= epsilon; no update was applied
  bool fallback_conservative = false;  // new-slice gradient vanished under Algorithm1
  // Per coordinate, total change over all slices before projection.
  std::vector<double> pre_projection_change;
};

struct OsraProblem {
  Scenario scenario;  // its alloc is ignored; the state carries allocations
  SliceId new_slice = 0;
  const QoeOracle* existing_oracle = nullptr;   // known slices (analytic)
  const QoeOracle* new_slice_oracle = nullptr;  // probed slice (simulation)
  int penalty_exponent = 2;
  std::uint64_t seed = 1;  // root of all probe seeds
};

struct OsraState {
  int k = 0;
  AllocationMatrix alloc;
  ProbeMemory memory;
};

struct OsraStepResult {
  OsraState next;
  IterationTrace trace;
};

// Seed for repetition `rep` of a probe at iteration k.
std::uint64_t probe_seed(const OsraProblem& problem, const OsraConfig& config, int k, std::size_t coordinate,
                         ProbeSide side, int rep);

OsraStepResult osra_step(OsraState state, const OsraProblem& problem, const OsraConfig& config);

struct OsraResult {
  AllocationMatrix final_alloc;
  std::vector<IterationTrace> traces;
  ProbeMemory memory;
  bool converged = false;
  bool max_iters_exceeded = false;
  // Updates applied before the stopping rule fired (or max_iters).
  int iterations = 0;
};

OsraResult run_osra(const AllocationMatrix& initial, const OsraProblem& problem, const OsraConfig& config);

}  // namespace slicelab
