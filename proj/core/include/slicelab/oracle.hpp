#pragma once

#include <cstdint>
#include <vector>

#include "slicelab/domain.hpp"
#include "slicelab/simulator.hpp"

namespace slicelab {

// Evaluates a slice's (delay, throughput) at an allocation. Implementations
// are pure given the seed: equal inputs produce equal samples.
class QoeOracle {
 public:
  virtual ~QoeOracle() = default;
  virtual QoeSample evaluate(SliceId slice, const AllocationMatrix& alloc, std::uint64_t seed) const = 0;
  virtual DelayStatistic statistic() const = 0;
};

// Service rates of the two-stage M/M/1 model, all in requests per second.
struct Mm1Rates {
  double arrival = 0.0;
  std::vector<double> links;  // one per edge: f * B(e) / (8 E[size])
  double server = 0.0;        // sum_c phi_c * MIPS_c / demand_mi

  double bottleneck() const;
  bool stable() const;
};

Mm1Rates mm1_rates(const SliceSpec& slice, const AllocationVector& alloc, const Topology& topology);

// Sum of M/M/1 mean sojourn times over every stage, in ms. When some stage
// has arrival >= service rate the queue is unstable: delay is kUnbounded and
// throughput is min(1, mu / lambda) at the bottleneck. Stable queues lose
// nothing, so throughput is 1.
QoeSample analytic_mm1_evaluate(const SliceSpec& slice, const AllocationVector& alloc, const Topology& topology);

class AnalyticOracle final : public QoeOracle {
 public:
  explicit AnalyticOracle(Scenario scenario) : scenario_(std::move(scenario)) {}
  QoeSample evaluate(SliceId slice, const AllocationMatrix& alloc, std::uint64_t seed) const override;
  DelayStatistic statistic() const override { return {StatisticKind::Mean, 95.0}; }

 private:
  Scenario scenario_;
};

// Simulates only `slice` for the configured horizon with the given seed and
// summarizes its post-warmup requests.
QoeSample sim_evaluate(SliceId slice, const AllocationMatrix& alloc, const Scenario& scenario, const SimConfig& config,
                       std::uint64_t seed, const DelayStatistic& statistic, bool keep_raw = false);

class SimulationOracle final : public QoeOracle {
 public:
  SimulationOracle(Scenario scenario, SimConfig config, DelayStatistic statistic)
      : scenario_(std::move(scenario)), config_(config), statistic_(statistic) {}
  QoeSample evaluate(SliceId slice, const AllocationMatrix& alloc, std::uint64_t seed) const override;
  DelayStatistic statistic() const override { return statistic_; }

 private:
  Scenario scenario_;
  SimConfig config_;
  DelayStatistic statistic_;
};

}  // namespace slicelab
