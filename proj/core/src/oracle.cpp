#include "slicelab/oracle.hpp"

#include <algorithm>
#include <array>

#include "slicelab/errors.hpp"

namespace slicelab {

double Mm1Rates::bottleneck() const {
  double mu = server;
  for (double m : links) mu = std::min(mu, m);
  return mu;
}

bool Mm1Rates::stable() const { return bottleneck() > arrival; }

Mm1Rates mm1_rates(const SliceSpec& slice, const AllocationVector& alloc, const Topology& topology) {
  if (alloc.n_edges() != topology.edges.size() || alloc.n_cores() != topology.cores.size()) {
    throw DimensionMismatch("allocation does not match topology");
  }
  Mm1Rates r;
  r.arrival = slice.traffic.mean_rate;
  const double bits = 8.0 * slice.traffic.mean_size_bytes();
  for (std::size_t e = 0; e < topology.edges.size(); ++e) {
    r.links.push_back(alloc.flow(e) * topology.edges[e].capacity_mbps * 1e6 / bits);
  }
  r.server = alloc.cpu_mips(topology) / slice.demand_mi;
  return r;
}

QoeSample analytic_mm1_evaluate(const SliceSpec& slice, const AllocationVector& alloc, const Topology& topology) {
  const auto r = mm1_rates(slice, alloc, topology);
  QoeSample s;
  s.n_requests = 0;
  if (!r.stable()) {
    s.delay_stat_ms = kUnbounded;
    s.throughput = std::min(1.0, r.bottleneck() / r.arrival);
    return s;
  }
  double sojourn_s = 1.0 / (r.server - r.arrival);
  for (double mu : r.links) sojourn_s += 1.0 / (mu - r.arrival);
  s.delay_stat_ms = sojourn_s * 1e3;
  s.throughput = 1.0;
  return s;
}

QoeSample AnalyticOracle::evaluate(SliceId slice, const AllocationMatrix& alloc, std::uint64_t seed) const {
  auto s = analytic_mm1_evaluate(scenario_.slice(slice), alloc.at(slice), scenario_.topology);
  s.seed = seed;
  return s;
}

QoeSample sim_evaluate(SliceId slice, const AllocationMatrix& alloc, const Scenario& scenario, const SimConfig& config,
                       std::uint64_t seed, const DelayStatistic& statistic, bool keep_raw) {
  SimConfig cfg = config;
  cfg.seed = seed;
  cfg.keep_trace = false;
  const std::array<SliceId, 1> only{slice};
  auto result = run_sim(scenario, alloc, cfg, only);
  auto s = summarize(result.at(slice), statistic, keep_raw);
  s.seed = seed;
  return s;
}

QoeSample SimulationOracle::evaluate(SliceId slice, const AllocationMatrix& alloc, std::uint64_t seed) const {
  return sim_evaluate(slice, alloc, scenario_, config_, seed, statistic_);
}

}  // namespace slicelab
