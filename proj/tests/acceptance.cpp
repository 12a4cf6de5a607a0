// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Every tolerance is fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "slicelab/baseline.hpp"
#include "slicelab/experiment.hpp"
#include "slicelab/oracle.hpp"
#include "slicelab/osra.hpp"
#include "slicelab/penalty.hpp"
#include "slicelab/projection.hpp"
#include "slicelab/simulator.hpp"
#include "support.hpp"

using namespace slicelab;

namespace {

constexpr int kSeeds = 10;
constexpr int kMaxIterations = 10;
constexpr int kMinConvergedSeeds = 9;
constexpr double kRuntimeBudgetS = 120.0;
constexpr double kInversionTolerance = 0.05;
constexpr double kSlice1MeanDelayMs = 2.0;
constexpr double kSlice2MaxDelayViolationMs = 4.0;
constexpr double kSlice1Throughput = 0.99;
constexpr double kSlice2ThroughputChange = 0.02;
constexpr double kBaselineRatio = 10.0;
constexpr double kBaselineAbsolute = 0.5;
constexpr int kProjectionTrials = 1000;
constexpr double kProjectionTol = 1e-8;
constexpr double kProjectionPropertyTol = 1e-12;
constexpr double kQuadraticTol = 1e-10;
constexpr double kQuarticRatioLo = 3.5;
constexpr double kQuarticRatioHi = 4.5;
constexpr double kMm1Tol = 0.15;
constexpr double kFeasibilityTol = 1e-9;
constexpr double kConservationTol = 1e-12;
constexpr int kConservationSteps = 20;

struct Outcome {
  int id;
  bool pass;
  std::string line;
};
std::vector<Outcome> outcomes;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  outcomes.push_back({id, pass, fmt::format("{} [{}] {}: {}", pass ? "PASS" : "FAIL", id, name, detail)});
}

std::vector<std::uint64_t> seed_list() {
  std::vector<std::uint64_t> s(kSeeds);
  std::iota(s.begin(), s.end(), 1);
  return s;
}

// Counts steps against the expected direction; returns (count, worst relative size).
std::pair<int, double> inversions(const std::vector<double>& series, bool increasing) {
  int n = 0;
  double worst = 0.0;
  for (std::size_t k = 1; k < series.size(); ++k) {
    double step = increasing ? series[k - 1] - series[k] : series[k] - series[k - 1];
    if (step > 0.0) {
      ++n;
      worst = std::max(worst, step / std::abs(series[k - 1]));
    }
  }
  return {n, worst};
}

std::string csv_of(const ScenarioConfig& c, const SeedRun& r) {
  std::ostringstream out;
  write_iterations_csv(out, c, r);
  write_qoe_csv(out, r);
  write_final_alloc_csv(out, c, r.osra.final_alloc);
  return out.str();
}

void reference_criteria() {
  const auto config = reference_scenario();
  const auto seeds = seed_list();

  const auto t0 = std::chrono::steady_clock::now();
  const auto runs = run_seeds(config, seeds, 0);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  // 1. Convergence speed.
  {
    int fast = 0;
    int worst = 0;
    for (const auto& r : runs) {
      if (r.osra.converged && r.osra.iterations <= kMaxIterations) ++fast;
      worst = std::max(worst, r.osra.converged ? r.osra.iterations : -1);
    }
    report(1, "convergence speed", fast >= kMinConvergedSeeds && seconds < kRuntimeBudgetS,
           fmt::format("{}/{} seeds stopped within {} iterations (slowest {}), {:.1f} s for all seeds", fast, kSeeds,
                       kMaxIterations, worst, seconds));
  }

  const auto agg = aggregate_qoe(runs);
  auto series = [&](SliceId id, double AggregateRow::*field) {
    std::vector<double> v;
    for (const auto& row : agg) {
      if (row.slice == id) v.push_back(row.*field);
    }
    return v;
  };

  // 2. Hand-off direction.
  {
    auto d1 = series(1, &AggregateRow::mean_delay_ms);
    auto d2 = series(2, &AggregateRow::mean_delay_ms);
    auto [n1, w1] = inversions(d1, false);
    auto [n2, w2] = inversions(d2, true);
    double worst_violation = 0.0;
    for (const auto& r : runs) worst_violation = std::max(worst_violation, r.qoe.back()[1].max_delay_violation_ms);
    bool pass = n1 + n2 <= 1 && w1 <= kInversionTolerance && w2 <= kInversionTolerance &&
                d1.back() <= kSlice1MeanDelayMs && worst_violation <= kSlice2MaxDelayViolationMs;
    report(2, "QoE hand-off direction", pass,
           fmt::format("slice 1 mean delay {:.3f} -> {:.3f} ms ({} inversions), slice 2 {:.3f} -> {:.3f} ms ({} "
                       "inversions), slice 2 worst final max-delay violation {:.3f} ms",
                       d1.front(), d1.back(), n1, d2.front(), d2.back(), n2, worst_violation));
  }

  // 3. Throughput recovery.
  {
    auto t1 = series(1, &AggregateRow::throughput);
    auto t2 = series(2, &AggregateRow::throughput);
    double change = std::abs(t2.back() - t2.front()) / t2.front();
    report(3, "throughput recovery", t1.back() >= kSlice1Throughput && change < kSlice2ThroughputChange,
           fmt::format("slice 1 throughput {:.4f} -> {:.4f}, slice 2 {:.4f} -> {:.4f} ({:.2f}% change)", t1.front(),
                       t1.back(), t2.front(), t2.back(), 100.0 * change));
  }

  // 4. Baseline failure, paired on the same seeds.
  {
    auto plan = baseline_allocation(config.scenario, config.baseline.budget_split, config.baseline.margin);
    auto mm1 = evaluate_allocation(config.scenario, plan.alloc, config.sim, seeds, 0);
    std::size_t osra_viol = 0, osra_total = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const std::uint64_t one[] = {seeds[i]};
      auto ev = evaluate_allocation(config.scenario, runs[i].osra.final_alloc, config.sim, one, 1).at(1);
      osra_viol += ev.violations;
      osra_total += ev.delays_ms.size();
    }
    double osra_frac = osra_total ? static_cast<double>(osra_viol) / static_cast<double>(osra_total) : 0.0;
    double base_frac = mm1.at(1).violation_fraction;
    report(4, "baseline failure", base_frac >= kBaselineAbsolute && base_frac >= kBaselineRatio * osra_frac,
           fmt::format("slice 1 violation fraction: M/M/1 sizing {:.4f}, reconfigured {:.4f}", base_frac, osra_frac));
  }

  // 8. Feasibility and reproducibility.
  {
    ConstraintSet cs(config.scenario.topology);
    bool feasible = true;
    for (const auto& r : runs) {
      for (const auto& t : r.osra.traces) feasible = feasible && cs.contains(t.alloc, kFeasibilityTol);
      feasible = feasible && cs.contains(r.osra.final_alloc, kFeasibilityTol);
    }
    auto threaded_cfg = config;
    threaded_cfg.osra.threads = 4;
    auto again = run_seeds(config, seeds, 1);
    auto threaded = run_seeds(threaded_cfg, seeds, 3);
    bool identical = true;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      auto base = csv_of(config, runs[i]);
      identical = identical && base == csv_of(config, again[i]) && base == csv_of(config, threaded[i]) &&
                  runs[i].osra.memory.entries() == threaded[i].osra.memory.entries();
    }
    report(8, "feasibility and determinism", feasible && identical,
           fmt::format("all iterates feasible within {:g}: {}; reruns byte-identical (serial, seed-parallel, "
                       "probe-parallel): {}",
                       kFeasibilityTol, feasible ? "yes" : "no", identical ? "yes" : "no"));
  }
}

void projection_criterion() {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  std::uniform_int_distribution<int> dim(1, 4);
  double worst_oracle = 0.0, worst_idem = 0.0, worst_expand = -1.0;
  for (int t = 0; t < kProjectionTrials; ++t) {
    const auto n = static_cast<std::size_t>(dim(gen));
    std::vector<double> y(n), z(n);
    for (auto& v : y) v = u(gen);
    for (auto& v : z) v = u(gen);
    auto py = project_capped_simplex(y);
    auto pz = project_capped_simplex(z);
    worst_oracle = std::max(worst_oracle, testsupport::distance(py, testsupport::brute_force_projection(y)));
    worst_idem = std::max(worst_idem, testsupport::distance(project_capped_simplex(py), py));
    worst_expand = std::max(worst_expand, testsupport::distance(py, pz) - testsupport::distance(y, z));
  }
  report(5, "projection oracle equivalence",
         worst_oracle <= kProjectionTol && worst_idem <= kProjectionPropertyTol &&
             worst_expand <= kProjectionPropertyTol,
         fmt::format("{} vectors: max distance to active-set QP {:.2e}, idempotence {:.2e}, expansion {:.2e}",
                     kProjectionTrials, worst_oracle, worst_idem, std::max(worst_expand, 0.0)));
}

PointEvaluator penalty_as_delay(std::function<double(const AllocationVector&)> f) {
  // delay = sqrt(f) with tau = 0, alpha_tau = 1, squared hinge: penalty = f.
  return [f](const AllocationVector& x, std::uint64_t seed) {
    QoeSample s;
    s.delay_stat_ms = std::sqrt(f(x));
    s.seed = seed;
    return s;
  };
}

void gradient_criterion() {
  const PenaltyModel model{{0.0, 0.0}, 1.0, 0.0, 2};
  GradientOptions opt;
  opt.delta = 0.05;

  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_quadratic = 0.0;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> a(4), c(4);
    for (auto& v : a) v = u(gen) * 2.0 - 1.0;
    for (auto& v : c) v = u(gen);
    auto f = [&](const AllocationVector& x) {
      double lin = 3.0, sq = 0.0;
      for (std::size_t i = 0; i < 4; ++i) {
        lin += a[i] * x[i];
        sq += c[i] * x[i] * x[i];
      }
      return lin * lin + sq;
    };
    AllocationVector x(std::vector<double>{u(gen), u(gen)}, {u(gen), u(gen)});
    if (t % 3 == 0) x[t % 4] = t % 2 ? 1.0 : 0.0;  // exercise the one-sided stencils
    auto g = penalty_gradient(model, penalty_as_delay(f), x, opt).gradient;
    double lin = 3.0;
    for (std::size_t i = 0; i < 4; ++i) lin += a[i] * x[i];
    for (std::size_t i = 0; i < 4; ++i) {
      worst_quadratic = std::max(worst_quadratic, std::abs(g[i] - (2.0 * lin * a[i] + 2.0 * c[i] * x[i])));
    }
  }

  // Quartic with a nonzero third derivative: pi = (1 + x0 + x1^2)^4 + x1^4.
  auto quartic = [](const AllocationVector& x) { return std::pow(1.0 + x[0] + x[1] * x[1], 4) + std::pow(x[1], 4); };
  AllocationVector x(std::vector<double>{0.4}, {0.5});
  const double s = 1.0 + 0.4 + 0.25;
  const double exact0 = 4.0 * s * s * s;
  const double exact1 = 4.0 * s * s * s * 2.0 * 0.5 + 4.0 * 0.125;
  double min_ratio = 1e9, max_ratio = 0.0;
  std::vector<double> prev;
  for (double delta : {0.08, 0.04, 0.02, 0.01}) {
    opt.delta = delta;
    auto g = penalty_gradient(model, penalty_as_delay(quartic), x, opt).gradient;
    std::vector<double> err = {std::abs(g[0] - exact0), std::abs(g[1] - exact1)};
    if (!prev.empty()) {
      for (std::size_t i = 0; i < 2; ++i) {
        min_ratio = std::min(min_ratio, prev[i] / err[i]);
        max_ratio = std::max(max_ratio, prev[i] / err[i]);
      }
    }
    prev = err;
  }
  report(6, "gradient fidelity",
         worst_quadratic <= kQuadraticTol && min_ratio >= kQuarticRatioLo && max_ratio <= kQuarticRatioHi,
         fmt::format("quadratic max error {:.2e}; quartic error ratio per halving in [{:.3f}, {:.3f}]",
                     worst_quadratic, min_ratio, max_ratio));
}

void queueing_criterion() {
  // One link carrying Poisson traffic with exponential sizes; the CPU stage
  // is made negligible so the system is an M/M/1 queue.
  Scenario sc;
  sc.topology = testsupport::topology(1, 8.0, 1, 3e8);
  sc.topology.buffer_pkts = 1000000;
  auto s = testsupport::poisson_slice(1, 1.0, 1000.0);
  s.traffic.size_min = 20.0;
  s.traffic.size_max = 1980.0;  // mean 1000 B: 1000 req/s at the full link
  s.traffic.size_dist = SizeDistribution::Exponential;
  s.demand_mi = 1.0;
  sc.slices.push_back(s);
  sc.alloc.rows[1] = AllocationVector(std::vector<double>{1.0}, {1.0});
  SimConfig cfg;
  cfg.horizon_s = 60.0;
  cfg.warmup_s = 6.0;
  cfg.propagation_ms = 0.0;

  bool pass = true;
  std::vector<std::string> parts;
  for (double util : {0.3, 0.5, 0.7}) {
    sc.slices[0].traffic.mean_rate = 1000.0 * util;
    double sum = 0.0;
    std::size_t n = 0;
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
      cfg.seed = seed;
      auto r = run_sim(sc, sc.alloc, cfg).at(1);
      sum += std::accumulate(r.delays_ms.begin(), r.delays_ms.end(), 0.0);
      n += r.delays_ms.size();
    }
    double sim = sum / static_cast<double>(n);
    double analytic = analytic_mm1_evaluate(sc.slices[0], sc.alloc.at(1), sc.topology).delay_stat_ms;
    double err = std::abs(sim - analytic) / analytic;
    pass = pass && err <= kMm1Tol;
    parts.push_back(fmt::format("rho {:.1f}: sim {:.3f} ms vs {:.3f} ms ({:.1f}%)", util, sim, analytic, 100.0 * err));
  }
  report(7, "simulator vs M/M/1", pass, fmt::format("{}", fmt::join(parts, "; ")));
}

void conservation_criterion() {
  using Fn = std::function<double(SliceId, const AllocationVector&)>;
  testsupport::FunctionOracle<Fn> existing(0.0, [](SliceId id, const AllocationVector& x) {
    double s = 0.0;
    for (std::size_t d = 0; d < x.dim(); ++d) s += (1.0 + 0.1 * id + 0.2 * d) * x[d];
    return s;
  });
  testsupport::FunctionOracle<Fn> fresh(0.0, [](SliceId, const AllocationVector& x) {
    double s = 0.0;
    for (std::size_t d = 0; d < x.dim(); ++d) s += std::max(0.0, 0.5 - x[d]) * (1.0 + d);
    return s;
  });
  OsraProblem p;
  p.scenario.topology = testsupport::topology(2, 100.0, 2, 3e8);
  for (int id : {1, 2, 3}) {
    SliceSpec s;
    s.id = id;
    s.priority_rank = id;
    s.requirement = {0.0, 0.0};
    s.alpha_tau = id == 1 ? 5.0 : 1.0;
    p.scenario.slices.push_back(s);
  }
  p.new_slice = 1;
  p.existing_oracle = &existing;
  p.new_slice_oracle = &fresh;
  AllocationMatrix start;
  start.rows[1] = AllocationVector(std::vector<double>{0.05, 0.1}, {0.0, 0.02});
  start.rows[2] = AllocationVector(std::vector<double>{0.5, 0.4}, {0.6, 0.5});
  start.rows[3] = AllocationVector(std::vector<double>{0.45, 0.5}, {0.4, 0.48});

  OsraConfig cfg;
  cfg.eta = 1e-4;  // stays in the interior for all steps
  cfg.schedule = StepSchedule::Constant;
  cfg.probes = 1;
  cfg.transfer_rule = TransferRule::Conservative;
  cfg.epsilon = 0.0;
  cfg.max_iters = kConservationSteps;
  auto r = run_osra(start, p, cfg);
  double worst = 0.0;
  for (const auto& t : r.traces) {
    for (double c : t.pre_projection_change) worst = std::max(worst, std::abs(c));
  }
  bool pass = static_cast<int>(r.traces.size()) == kConservationSteps && worst <= kConservationTol;
  report(9, "conservative transfer", pass,
         fmt::format("{} steps, max per-coordinate total change before projection {:.2e}", r.traces.size(), worst));
}

}  // namespace

int main() {
  reference_criteria();
  projection_criterion();
  gradient_criterion();
  queueing_criterion();
  conservation_criterion();
  std::sort(outcomes.begin(), outcomes.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  int failures = 0;
  for (const auto& o : outcomes) {
    fmt::print("{}\n", o.line);
    failures += o.pass ? 0 : 1;
  }
  fmt::print("{} of {} criteria passed\n", outcomes.size() - failures, outcomes.size());
  return failures == 0 ? 0 : 1;
}
