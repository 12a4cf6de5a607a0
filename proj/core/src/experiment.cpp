#include "slicelab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "slicelab/oracle.hpp"
#include "slicelab/parallel.hpp"

namespace slicelab {

ScenarioConfig reference_scenario() {
  ScenarioConfig c;
  auto& sc = c.scenario;
  sc.topology.buffer_pkts = 100;
  sc.topology.edges = {{0, 1000.0}};
  sc.topology.cores = {{0, 3e8}, {1, 3e8}};

  SliceSpec urllc;
  urllc.id = 1;
  urllc.name = "urllc";
  urllc.priority_rank = 0;
  urllc.requirement = {2.0, 0.999};
  urllc.alpha_tau = 10.0;
  urllc.alpha_rho = 1e5;
  urllc.demand_mi = 5e4;
  urllc.traffic = {TrafficKind::BurstyOnOff, 200.0, 8.0, 36.0, 20.0, 65535.0, SizeDistribution::Uniform};

  SliceSpec embb;
  embb.id = 2;
  embb.name = "embb";
  embb.priority_rank = 1;
  embb.requirement = {5.0, 0.95};
  embb.alpha_tau = 1.0;
  embb.alpha_rho = 1e4;
  embb.demand_mi = 8e4;
  embb.traffic = {TrafficKind::BurstyOnOff, 150.0, 8.0, 20.0, 20.0, 65535.0, SizeDistribution::Uniform};

  SliceSpec best_effort;
  best_effort.id = 3;
  best_effort.name = "best-effort";
  best_effort.priority_rank = 2;
  best_effort.requirement = {kUnbounded, 1.0};
  best_effort.alpha_tau = 0.0;
  best_effort.alpha_rho = 1e3;
  best_effort.demand_mi = 1e5;
  best_effort.traffic = {TrafficKind::BurstyOnOff, 100.0, 8.0, 20.0, 20.0, 65535.0, SizeDistribution::Uniform};

  sc.slices = {urllc, embb, best_effort};
  sc.alloc.rows[1] = AllocationVector({0.02}, {0.05, 0.05});
  sc.alloc.rows[2] = AllocationVector({0.55}, {0.5, 0.5});
  sc.alloc.rows[3] = AllocationVector({0.43}, {0.45, 0.45});

  c.new_slice = 1;
  c.sim = SimConfig{};
  c.statistic = DelayStatistic{StatisticKind::Max, 95.0};
  c.osra.eta = 0.1;
  c.osra.schedule = StepSchedule::Normalized;
  c.osra.transfer_rule = TransferRule::Conservative;
  c.osra.delta = 0.02;
  c.osra.probes = 10;
  c.osra.epsilon = 1e-3;
  c.osra.max_iters = 50;
  c.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  return c;
}

SliceQoe slice_qoe(const SliceSpec& slice, const SliceEvaluation& ev) {
  SliceQoe q;
  q.slice = slice.id;
  q.offered = ev.offered;
  q.mean_delay_ms = ev.mean_delay_ms;
  q.max_delay_ms = ev.max_delay_ms;
  q.throughput = ev.throughput;
  q.violation_fraction = ev.violation_fraction;
  if (slice.requirement.delay_bounded() && !ev.empty) {
    q.max_delay_violation_ms = std::max(0.0, ev.max_delay_ms - slice.requirement.tau_ms);
  }
  return q;
}

namespace {

std::vector<SliceQoe> monitor(const ScenarioConfig& config, const AllocationMatrix& alloc, std::uint64_t seed) {
  const std::uint64_t seeds[] = {seed};
  auto ev = evaluate_allocation(config.scenario, alloc, config.sim, seeds, 1);
  std::vector<SliceQoe> out;
  for (const auto& s : config.scenario.slices) out.push_back(slice_qoe(s, ev.at(s.id)));
  return out;
}

}  // namespace

SeedRun run_seed(const ScenarioConfig& config, std::uint64_t seed, bool with_monitor) {
  const auto start = std::chrono::steady_clock::now();
  AnalyticOracle analytic(config.scenario);
  SimulationOracle simulated(config.scenario, config.sim, config.statistic);

  OsraProblem problem;
  problem.scenario = config.scenario;
  problem.new_slice = config.new_slice;
  problem.existing_oracle = &analytic;
  problem.new_slice_oracle = &simulated;
  problem.penalty_exponent = config.penalty_exponent;
  problem.seed = seed;

  SeedRun run;
  run.seed = seed;
  run.osra = run_osra(config.scenario.alloc, problem, config.osra);
  if (with_monitor) {
    const int last = run.osra.iterations;
    for (int k = 0; k <= last; ++k) {
      const auto& alloc = k < static_cast<int>(run.osra.traces.size()) && k < last ? run.osra.traces[k].alloc
                                                                                    : run.osra.final_alloc;
      run.qoe.push_back(monitor(config, alloc, seed));
    }
  }
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

std::vector<SeedRun> run_seeds(const ScenarioConfig& config, std::span<const std::uint64_t> seeds, unsigned threads,
                               bool with_monitor) {
  return parallel_map(seeds.size(), threads, [&](std::size_t i) { return run_seed(config, seeds[i], with_monitor); });
}

std::vector<AggregateRow> aggregate_qoe(std::span<const SeedRun> runs) {
  std::vector<AggregateRow> out;
  std::size_t depth = 0;
  for (const auto& r : runs) depth = std::max(depth, r.qoe.size());
  if (runs.empty() || depth == 0) return out;
  const std::size_t n_slices = runs.front().qoe.front().size();
  for (std::size_t k = 0; k < depth; ++k) {
    for (std::size_t s = 0; s < n_slices; ++s) {
      AggregateRow row;
      row.k = static_cast<int>(k);
      for (const auto& r : runs) {
        if (r.qoe.empty()) continue;
        const auto& q = r.qoe[std::min(k, r.qoe.size() - 1)][s];
        row.slice = q.slice;
        row.n_seeds += 1;
        row.mean_delay_ms += q.mean_delay_ms;
        row.max_delay_ms += q.max_delay_ms;
        row.throughput += q.throughput;
        row.violation_fraction += q.violation_fraction;
        row.max_delay_violation_ms += q.max_delay_violation_ms;
      }
      const double n = static_cast<double>(row.n_seeds);
      row.mean_delay_ms /= n;
      row.max_delay_ms /= n;
      row.throughput /= n;
      row.violation_fraction /= n;
      row.max_delay_violation_ms /= n;
      out.push_back(row);
    }
  }
  return out;
}

CompareReport run_compare(const ScenarioConfig& config, std::span<const std::uint64_t> seeds, unsigned threads) {
  CompareReport rep;
  rep.baseline = baseline_allocation(config.scenario, config.baseline.budget_split, config.baseline.margin);
  rep.runs = run_seeds(config, seeds, threads, false);

  struct PerSeed {
    AllocationEvaluation osra;
    AllocationEvaluation mm1;
  };
  auto evals = parallel_map(seeds.size(), threads, [&](std::size_t i) {
    const std::uint64_t one[] = {seeds[i]};
    PerSeed p;
    p.osra = evaluate_allocation(config.scenario, rep.runs[i].osra.final_alloc, config.sim, one, 1);
    p.mm1 = evaluate_allocation(config.scenario, rep.baseline.alloc, config.sim, one, 1);
    return p;
  });

  for (const std::string method : {"osra", "mm1"}) {
    const bool is_mm1 = method == "mm1";
    for (const auto& s : config.scenario.slices) {
      const bool clamped = is_mm1 && rep.baseline.clamped.at(s.id);
      std::vector<SliceEvaluation> per_seed;
      for (std::size_t i = 0; i < seeds.size(); ++i) {
        const auto& ev = is_mm1 ? evals[i].mm1 : evals[i].osra;
        per_seed.push_back(ev.at(s.id));
        rep.rows.push_back({method, s.id, seeds[i], ev.at(s.id), clamped});
      }
      // Pool by re-evaluating over the concatenated per-seed counts and delays.
      SliceEvaluation pooled;
      pooled.slice = s.id;
      for (const auto& e : per_seed) {
        pooled.offered += e.offered;
        pooled.succeeded += e.succeeded;
        pooled.delays_ms.insert(pooled.delays_ms.end(), e.delays_ms.begin(), e.delays_ms.end());
      }
      SliceRunResult merged;
      merged.slice = s.id;
      merged.offered = pooled.offered;
      merged.succeeded = pooled.succeeded;
      merged.delays_ms = std::move(pooled.delays_ms);
      const SliceRunResult* ptr = &merged;
      pooled = evaluate_slice(s, std::span<const SliceRunResult* const>(&ptr, 1));
      rep.histograms.push_back({method, s.id, delay_histogram(pooled.delays_ms, config.baseline.histogram_bin_ms)});
      if (seeds.size() > 1) rep.rows.push_back({method, s.id, std::nullopt, std::move(pooled), clamped});
    }
  }
  return rep;
}

namespace {

std::string num(double v) {
  if (is_unbounded(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

}  // namespace

void write_iterations_csv(std::ostream& out, const ScenarioConfig& config, const SeedRun& run) {
  const auto& sc = config.scenario;
  const std::size_t dim = sc.topology.dim();
  const auto lower = lower_priority_slices(sc, config.new_slice);
  auto coord_name = [&](std::size_t d) {
    const std::size_t ne = sc.topology.edges.size();
    return d < ne ? fmt::format("f{}", sc.topology.edges[d].id) : fmt::format("phi{}", sc.topology.cores[d - ne].id);
  };

  std::vector<std::string> cols = {"k", "stop_metric", "converged", "fallback_conservative"};
  for (const auto& s : sc.slices) {
    cols.push_back(fmt::format("delay_stat_ms_{}", s.id));
    cols.push_back(fmt::format("throughput_{}", s.id));
    cols.push_back(fmt::format("penalty_{}", s.id));
  }
  for (SliceId i : lower) cols.push_back(fmt::format("eta_{}", i));
  for (const auto& s : sc.slices) {
    for (std::size_t d = 0; d < dim; ++d) cols.push_back(fmt::format("alloc_{}_{}", s.id, coord_name(d)));
  }
  for (const auto& s : sc.slices) {
    for (std::size_t d = 0; d < dim; ++d) cols.push_back(fmt::format("grad_{}_{}", s.id, coord_name(d)));
  }
  for (std::size_t d = 0; d < dim; ++d) cols.push_back(fmt::format("transfer_{}", coord_name(d)));
  for (std::size_t d = 0; d < dim; ++d) cols.push_back(fmt::format("pre_projection_change_{}", coord_name(d)));
  fmt::print(out, "{}\n", fmt::join(cols, ","));

  for (const auto& t : run.osra.traces) {
    std::vector<std::string> v = {std::to_string(t.k), num(t.stop_metric), t.converged ? "1" : "0",
                                  t.fallback_conservative ? "1" : "0"};
    for (const auto& s : sc.slices) {
      const auto& q = t.qoe.at(s.id);
      v.push_back(num(q.delay_stat_ms));
      v.push_back(num(q.throughput));
      v.push_back(num(t.penalty.at(s.id)));
    }
    for (SliceId i : lower) v.push_back(num(t.eta.at(i)));
    for (const auto& s : sc.slices) {
      for (std::size_t d = 0; d < dim; ++d) v.push_back(num(t.alloc.at(s.id)[d]));
    }
    for (const auto& s : sc.slices) {
      const auto& g = t.gradient.at(s.id);
      for (std::size_t d = 0; d < dim; ++d) v.push_back(num(g[d]));
    }
    for (std::size_t d = 0; d < dim; ++d) v.push_back(num(t.transfer[d]));
    for (std::size_t d = 0; d < dim; ++d) v.push_back(num(t.pre_projection_change[d]));
    fmt::print(out, "{}\n", fmt::join(v, ","));
  }
}

void write_final_alloc_csv(std::ostream& out, const ScenarioConfig& config, const AllocationMatrix& alloc) {
  const auto& topo = config.scenario.topology;
  fmt::print(out, "slice,resource,id,fraction\n");
  for (const auto& [id, row] : alloc.rows) {
    for (std::size_t e = 0; e < topo.edges.size(); ++e) {
      fmt::print(out, "{},edge,{},{}\n", id, topo.edges[e].id, num(row.flow(e)));
    }
    for (std::size_t c = 0; c < topo.cores.size(); ++c) {
      fmt::print(out, "{},core,{},{}\n", id, topo.cores[c].id, num(row.cpu(c)));
    }
  }
}

void write_qoe_csv(std::ostream& out, const SeedRun& run) {
  fmt::print(out, "k,slice,offered,mean_delay_ms,max_delay_ms,throughput,violation_fraction,max_delay_violation_ms\n");
  for (std::size_t k = 0; k < run.qoe.size(); ++k) {
    for (const auto& q : run.qoe[k]) {
      fmt::print(out, "{},{},{},{},{},{},{},{}\n", k, q.slice, q.offered, num(q.mean_delay_ms), num(q.max_delay_ms),
                 num(q.throughput), num(q.violation_fraction), num(q.max_delay_violation_ms));
    }
  }
}

void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows) {
  fmt::print(out, "k,slice,n_seeds,mean_delay_ms,max_delay_ms,throughput,violation_fraction,max_delay_violation_ms\n");
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{},{},{},{},{},{}\n", r.k, r.slice, r.n_seeds, num(r.mean_delay_ms), num(r.max_delay_ms),
               num(r.throughput), num(r.violation_fraction), num(r.max_delay_violation_ms));
  }
}

void write_summary_csv(std::ostream& out, std::span<const SeedRun> runs) {
  fmt::print(out, "seed,converged,iterations,final_stop_metric,probes,seconds\n");
  for (const auto& r : runs) {
    const double stop = r.osra.traces.empty() ? 0.0 : r.osra.traces.back().stop_metric;
    fmt::print(out, "{},{},{},{},{},{:.3f}\n", r.seed, r.osra.converged ? 1 : 0, r.osra.iterations, num(stop),
               r.osra.memory.size(), r.seconds);
  }
}

void write_compare_csv(std::ostream& out, std::span<const CompareRow> rows) {
  fmt::print(out, "method,slice,seed,violation_fraction,mean_delay,throughput,max_delay,offered,succeeded,clamped\n");
  for (const auto& r : rows) {
    const auto& e = r.evaluation;
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{}\n", r.method, r.slice, r.seed ? std::to_string(*r.seed) : "all",
               num(e.violation_fraction), num(e.mean_delay_ms), num(e.throughput), num(e.max_delay_ms), e.offered,
               e.succeeded, r.clamped ? 1 : 0);
  }
}

void write_histogram_csv(std::ostream& out, std::span<const CompareHistogram> histograms) {
  fmt::print(out, "method,slice,bin_lo_ms,bin_hi_ms,count\n");
  for (const auto& h : histograms) {
    const double w = h.histogram.bin_width_ms;
    for (std::size_t b = 0; b < h.histogram.counts.size(); ++b) {
      fmt::print(out, "{},{},{},{},{}\n", h.method, h.slice, num(b * w), num((b + 1) * w), h.histogram.counts[b]);
    }
  }
}

}  // namespace slicelab
