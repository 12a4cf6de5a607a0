#include "slicelab/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "slicelab/parallel.hpp"
#include "slicelab/projection.hpp"

namespace slicelab {

Mm1Demand mm1_demand(const SliceSpec& slice, const Topology& topology, double budget_split, double margin) {
  if (!(budget_split > 0.0 && budget_split < 1.0)) throw std::invalid_argument("budget_split must be in (0, 1)");
  const double lambda = slice.traffic.mean_rate;
  const std::size_t n_edges = topology.edges.size();

  Mm1Demand out;
  if (slice.requirement.delay_bounded()) {
    const double tau_s = slice.requirement.tau_ms * 1e-3;
    const double per_link_s = tau_s * budget_split / static_cast<double>(n_edges);
    out.link_rates.assign(n_edges, lambda + 1.0 / per_link_s);
    out.server_rate = lambda + 1.0 / (tau_s * (1.0 - budget_split));
  } else {
    out.link_rates.assign(n_edges, lambda * (1.0 + margin));
    out.server_rate = lambda * (1.0 + margin);
  }

  const double bits = 8.0 * slice.traffic.mean_size_bytes();
  std::vector<double> flows(n_edges);
  for (std::size_t e = 0; e < n_edges; ++e) {
    flows[e] = out.link_rates[e] * bits / (topology.edges[e].capacity_mbps * 1e6);
  }
  double total_mips = 0.0;
  for (const auto& c : topology.cores) total_mips += c.mips;
  // Same fraction of every core, so sum_c phi_c * MIPS_c is the required rate.
  std::vector<double> cpu(topology.cores.size(), out.server_rate * slice.demand_mi / total_mips);

  auto clamp = [&](double v) {
    if (v > 1.0) {
      out.clamped = true;
      return 1.0;
    }
    return v;
  };
  std::transform(flows.begin(), flows.end(), flows.begin(), clamp);
  std::transform(cpu.begin(), cpu.end(), cpu.begin(), clamp);
  out.alloc = AllocationVector(std::move(flows), cpu);
  return out;
}

BaselinePlan baseline_allocation(const Scenario& scenario, double budget_split, double margin) {
  BaselinePlan plan;
  for (const auto& s : scenario.slices) {
    auto d = mm1_demand(s, scenario.topology, budget_split, margin);
    plan.alloc.rows[s.id] = std::move(d.alloc);
    plan.clamped[s.id] = d.clamped;
  }
  ConstraintSet constraints(scenario.topology);
  if (!constraints.contains(plan.alloc)) {
    plan.over_capacity = true;
    plan.alloc = project_constraint_set(plan.alloc, constraints);
  }
  return plan;
}

Histogram delay_histogram(std::span<const double> delays, double bin_width_ms) {
  if (!(bin_width_ms > 0.0)) throw std::invalid_argument("histogram bin width must be > 0");
  Histogram h;
  h.bin_width_ms = bin_width_ms;
  for (double d : delays) {
    if (!std::isfinite(d) || d < 0.0) continue;
    auto b = static_cast<std::size_t>(std::floor(d / bin_width_ms));
    if (b >= h.counts.size()) h.counts.resize(b + 1, 0);
    ++h.counts[b];
  }
  return h;
}

const SliceEvaluation& AllocationEvaluation::at(SliceId id) const {
  for (const auto& s : pooled) {
    if (s.slice == id) return s;
  }
  throw std::out_of_range(fmt::format("slice {} not evaluated", id));
}

SliceEvaluation evaluate_slice(const SliceSpec& slice, std::span<const SliceRunResult* const> runs) {
  SliceEvaluation ev;
  ev.slice = slice.id;
  for (const auto* r : runs) {
    ev.offered += r->offered;
    ev.succeeded += r->succeeded;
    ev.delays_ms.insert(ev.delays_ms.end(), r->delays_ms.begin(), r->delays_ms.end());
  }
  ev.throughput = ev.offered == 0 ? 1.0 : static_cast<double>(ev.succeeded) / static_cast<double>(ev.offered);
  if (ev.delays_ms.empty()) {
    ev.empty = true;
    return ev;
  }
  const double tau = slice.requirement.tau_ms;
  ev.violations = static_cast<std::size_t>(
      std::count_if(ev.delays_ms.begin(), ev.delays_ms.end(), [&](double d) { return d > tau; }));
  ev.violation_fraction = static_cast<double>(ev.violations) / static_cast<double>(ev.delays_ms.size());
  ev.mean_delay_ms = std::accumulate(ev.delays_ms.begin(), ev.delays_ms.end(), 0.0) /
                     static_cast<double>(ev.delays_ms.size());
  ev.max_delay_ms = *std::max_element(ev.delays_ms.begin(), ev.delays_ms.end());
  return ev;
}

AllocationEvaluation evaluate_allocation(const Scenario& scenario, const AllocationMatrix& alloc,
                                         const SimConfig& config, std::span<const std::uint64_t> seeds,
                                         unsigned threads) {
  auto runs = parallel_map(seeds.size(), threads, [&](std::size_t i) {
    SimConfig cfg = config;
    cfg.seed = seeds[i];
    cfg.keep_trace = false;
    return run_sim(scenario, alloc, cfg);
  });

  AllocationEvaluation out;
  for (const auto& s : scenario.slices) {
    std::vector<const SliceRunResult*> all;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const SliceRunResult* r = &runs[i].at(s.id);
      all.push_back(r);
      auto single = evaluate_slice(s, std::span<const SliceRunResult* const>(&r, 1));
      out.per_seed[seeds[i]].push_back(std::move(single));
    }
    out.pooled.push_back(evaluate_slice(s, all));
  }
  return out;
}

BaselineReport evaluate_baseline(const Scenario& scenario, const SimConfig& config,
                                 std::span<const std::uint64_t> seeds, double budget_split, unsigned threads) {
  BaselineReport rep;
  rep.plan = baseline_allocation(scenario, budget_split);
  rep.evaluation = evaluate_allocation(scenario, rep.plan.alloc, config, seeds, threads);
  return rep;
}

}  // namespace slicelab
