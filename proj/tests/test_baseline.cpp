#include <doctest.h>

#include "slicelab/baseline.hpp"
#include "slicelab/oracle.hpp"
#include "support.hpp"

using namespace slicelab;

TEST_CASE("stage rates from the delay budget") {
  // tau 4 ms, half to one link: W = 2 ms per stage -> mu = lambda + 500.
  auto s = testsupport::poisson_slice(1, 100.0, 1000.0);
  s.requirement.tau_ms = 4.0;
  auto topo = testsupport::topology(1, 8.0, 1, 3e8);
  auto d = mm1_demand(s, topo, 0.5);
  CHECK(d.link_rates[0] == doctest::Approx(600.0));
  CHECK(d.server_rate == doctest::Approx(600.0));
  // 600 req/s of 8000 bits on an 8 Mbps link
  CHECK(d.alloc.flow(0) == doctest::Approx(0.6));
  CHECK(!d.clamped);

  s.requirement.tau_ms = 2.0;
  auto d2 = mm1_demand(s, topo, 0.5);  // 1 ms per stage
  CHECK(d2.link_rates[0] == doctest::Approx(1100.0));
  CHECK(d2.server_rate == doctest::Approx(1100.0));
  CHECK(d2.alloc.cpu(0) == doctest::Approx(1100.0 * 5e4 / 3e8));
  CHECK(d2.alloc.cpu(0) == doctest::Approx(0.18333).epsilon(1e-4));
  CHECK(d2.clamped);  // needs 1.1 of the link
  CHECK(d2.alloc.flow(0) == 1.0);
}

TEST_CASE("the sizing meets the budget under its own model") {
  auto s = testsupport::poisson_slice(1, 150.0, 3000.0);
  s.requirement.tau_ms = 5.0;
  auto topo = testsupport::topology(2, 100.0, 2, 3e8);
  auto d = mm1_demand(s, topo, 0.4);
  auto q = analytic_mm1_evaluate(s, d.alloc, topo);
  CHECK(q.delay_stat_ms == doctest::Approx(5.0));
}

TEST_CASE("best-effort slices get stability plus a margin") {
  auto s = testsupport::poisson_slice(3, 100.0, 1000.0);
  s.requirement.tau_ms = kUnbounded;
  auto d = mm1_demand(s, testsupport::topology(1, 8.0, 1, 3e8), 0.5, 0.1);
  CHECK(d.link_rates[0] == doctest::Approx(110.0));
  CHECK(d.server_rate == doctest::Approx(110.0));
}

TEST_CASE("bad budget split") {
  auto s = testsupport::poisson_slice(1, 100.0, 1000.0);
  auto topo = testsupport::topology(1, 8.0, 1, 3e8);
  CHECK_THROWS_AS(mm1_demand(s, topo, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(mm1_demand(s, topo, 1.0), std::invalid_argument);
}

TEST_CASE("over-subscribed plans are projected and flagged") {
  Scenario sc;
  sc.topology = testsupport::topology(1, 8.0, 1, 3e8);
  for (int id = 1; id <= 2; ++id) {
    auto s = testsupport::poisson_slice(id, 400.0, 1000.0);  // 0.6 of the link each
    s.requirement.tau_ms = 10.0;
    sc.slices.push_back(s);
  }
  auto plan = baseline_allocation(sc);
  CHECK(plan.over_capacity);
  CHECK(plan.alloc.edge_sum(0) <= 1.0 + 1e-12);
  CHECK(!plan.clamped.at(1));
}

TEST_CASE("histogram bins") {
  std::vector<double> d = {0.1, 0.2, 0.6, 1.4, kUnbounded};
  auto h = delay_histogram(d, 0.5);
  CHECK(h.counts == std::vector<std::size_t>{2, 1, 1});
  CHECK_THROWS(delay_histogram(d, 0.0));
}

TEST_CASE("violation report over seeds") {
  Scenario sc;
  sc.topology = testsupport::topology(1, 8.0, 1, 3e8);
  auto s = testsupport::poisson_slice(1, 0.5, 1000.0);  // 1.1667 ms uncontended
  s.requirement.tau_ms = 1.1;
  sc.slices.push_back(s);
  sc.alloc.rows[1] = AllocationVector(std::vector<double>{1.0}, {1.0});
  SimConfig cfg;
  cfg.horizon_s = 40.0;
  cfg.propagation_ms = 0.0;
  const std::uint64_t seeds[] = {1, 2, 3};
  auto ev = evaluate_allocation(sc, sc.alloc, cfg, seeds, 2);
  CHECK(ev.per_seed.size() == 3);
  const auto& p = ev.at(1);
  CHECK(p.violation_fraction == 1.0);
  std::size_t total = 0;
  for (auto& [seed, rows] : ev.per_seed) total += rows[0].offered;
  CHECK(p.offered == total);

  sc.slices[0].requirement.tau_ms = 1.2;
  CHECK(evaluate_allocation(sc, sc.alloc, cfg, seeds).at(1).violation_fraction == 0.0);
}

TEST_CASE("no successes means an empty, zero-fraction report") {
  SliceSpec s = testsupport::poisson_slice(1, 1.0, 100.0);
  SliceRunResult r;
  r.slice = 1;
  const SliceRunResult* ptr = &r;
  auto ev = evaluate_slice(s, std::span<const SliceRunResult* const>(&ptr, 1));
  CHECK(ev.empty);
  CHECK(ev.violation_fraction == 0.0);
  CHECK(ev.throughput == 1.0);
}

TEST_CASE("M/M/1 sizing with headroom holds up under model-matched traffic but plain sizing fails under bursts") {
  Scenario sc;
  sc.topology = testsupport::topology(1, 1000.0, 2, 3e8);
  auto s = testsupport::poisson_slice(1, 200.0, 0.0);
  s.traffic.size_min = 20.0;
  s.traffic.size_max = 65535.0;
  s.traffic.size_dist = SizeDistribution::Exponential;
  s.requirement.tau_ms = 2.0;
  sc.slices.push_back(s);
  SimConfig cfg;
  const std::uint64_t seeds[] = {1, 2, 3, 4, 5};

  // Size for a third of the budget so the mean is far inside the bound.
  auto sized = sc.slices[0];
  sized.requirement.tau_ms = 2.0 / 3.0;
  sc.alloc.rows[1] = mm1_demand(sized, sc.topology).alloc;
  double matched = evaluate_allocation(sc, sc.alloc, cfg, seeds).at(1).violation_fraction;

  sc.slices[0].traffic.kind = TrafficKind::BurstyOnOff;
  sc.slices[0].traffic.burst_len = 8.0;
  sc.slices[0].traffic.off_time_ms = 36.0;
  sc.slices[0].traffic.size_dist = SizeDistribution::Uniform;
  sc.alloc.rows[1] = mm1_demand(sc.slices[0], sc.topology).alloc;
  double bursty = evaluate_allocation(sc, sc.alloc, cfg, seeds).at(1).violation_fraction;
  CHECK(matched < 0.1);
  CHECK(bursty > 0.5);
  CHECK(bursty > 10.0 * matched);
}
