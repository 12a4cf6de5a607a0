#include <doctest.h>

#include <algorithm>

#include "slicelab/domain.hpp"
#include "slicelab/errors.hpp"
#include "slicelab/experiment.hpp"
#include "support.hpp"

using namespace slicelab;

namespace {

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(), [&](const auto& s) { return s.find(needle) != std::string::npos; });
}

Scenario three_slices() {
  Scenario sc;
  sc.topology = testsupport::topology(1, 1000.0, 2, 3e8);
  for (int id = 1; id <= 3; ++id) sc.slices.push_back(testsupport::poisson_slice(id, 100.0, 1000.0));
  sc.alloc.rows[1] = AllocationVector(std::vector<double>{0.3}, {0.3, 0.2});
  sc.alloc.rows[2] = AllocationVector(std::vector<double>{0.3}, {0.3, 0.2});
  sc.alloc.rows[3] = AllocationVector(std::vector<double>{0.3}, {0.2, 0.3});
  return sc;
}

}  // namespace

TEST_CASE("column sums below one are valid") {
  auto sc = three_slices();
  CHECK(check_scenario(sc).empty());
  CHECK_NOTHROW(validate_scenario(sc));
}

TEST_CASE("an over-allocated edge is reported with its sum") {
  auto sc = three_slices();
  sc.alloc.rows[1] = AllocationVector(std::vector<double>{0.6}, {0.3, 0.2});
  auto v = check_scenario(sc);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "edge 0 sum 1.2 > 1");
  CHECK_THROWS_AS(validate_scenario(sc), InvariantViolation);
}

TEST_CASE("rho outside [0,1] is rejected") {
  auto sc = three_slices();
  sc.slices[2].requirement.rho = 1.3;
  CHECK(mentions(check_scenario(sc), "rho out of [0,1]"));
}

TEST_CASE("every violation is collected, not just the first") {
  auto sc = three_slices();
  sc.slices[0].traffic.mean_rate = 0.0;
  sc.slices[1].traffic.size_min = 10.0;
  sc.slices[2].traffic.size_max = 70000.0;
  sc.topology.buffer_pkts = 0;
  try {
    validate_scenario(sc);
    FAIL("expected InvariantViolation");
  } catch (const InvariantViolation& e) {
    CHECK(e.violations().size() == 4);
  }
}

TEST_CASE("bursts that cannot fit the mean rate are rejected") {
  auto sc = three_slices();
  auto& t = sc.slices[0].traffic;
  t.kind = TrafficKind::BurstyOnOff;
  t.mean_rate = 200.0;
  t.burst_len = 8.0;
  t.off_time_ms = 40.0;  // exactly 8 / 200 s: no time left for the burst itself
  CHECK(mentions(check_scenario(sc), "leaves no room"));
  t.off_time_ms = 36.0;
  CHECK(t.burst_spacing_s() == doctest::Approx(0.0005).epsilon(1e-12));
  CHECK(check_scenario(sc).empty());
}

TEST_CASE("allocation rows must match the topology and the slices") {
  auto sc = three_slices();
  sc.alloc.rows[4] = AllocationVector(std::vector<double>{0.0}, {0.0, 0.0});
  sc.alloc.rows.erase(2);
  sc.alloc.rows[1] = AllocationVector(std::vector<double>{0.1, 0.1}, {0.1});
  auto v = check_scenario(sc);
  CHECK(mentions(v, "unknown slice 4"));
  CHECK(mentions(v, "slice 2 has no allocation row"));
  CHECK(mentions(v, "topology needs 1+2"));
}

TEST_CASE("the new slice must outweigh every lower-priority slice") {
  auto sc = three_slices();
  sc.slices[0].alpha_tau = 10.0;
  sc.slices[0].alpha_rho = 10.0;
  CHECK(check_scenario(sc, 1).empty());
  sc.slices[0].alpha_rho = 1.0;
  CHECK(mentions(check_scenario(sc, 1), "weights must exceed"));
  CHECK(mentions(check_scenario(sc, 7), "not defined"));
  CHECK(mentions(check_scenario(sc, 3), "no lower-priority slices"));
}

TEST_CASE("lower-priority slices are ordered by rank then id") {
  auto sc = three_slices();
  sc.slices[0].priority_rank = 0;
  sc.slices[1].priority_rank = 5;
  sc.slices[2].priority_rank = 2;
  CHECK(lower_priority_slices(sc, 1) == std::vector<SliceId>{3, 2});
  CHECK(lower_priority_slices(sc, 3) == std::vector<SliceId>{2});
  CHECK(lower_priority_slices(sc, 2).empty());
}

TEST_CASE("allocation vectors keep links before cores") {
  AllocationVector v(std::vector<double>{0.1, 0.2}, {0.3});
  CHECK(v.dim() == 3);
  CHECK(v.n_edges() == 2);
  CHECK(v.n_cores() == 1);
  CHECK(v.flow(1) == 0.2);
  CHECK(v.cpu(0) == 0.3);
  CHECK(v[2] == 0.3);
  auto t = testsupport::topology(2, 100.0, 1, 3e8);
  CHECK(v.cpu_mips(t) == doctest::Approx(0.9e8));
  CHECK_THROWS_AS(AllocationVector::from_flat({0.1}, 2), DimensionMismatch);
  AllocationMatrix m;
  CHECK_THROWS_AS(m.at(3), DimensionMismatch);
}

TEST_CASE("the reference scenario is valid") {
  auto c = reference_scenario();
  CHECK(check_scenario(c.scenario, c.new_slice).empty());
  const auto& s1 = c.scenario.slice(1);
  CHECK(s1.requirement.tau_ms == 2.0);
  CHECK(s1.requirement.rho == 0.999);
  CHECK(s1.demand_mi == 5e4);
  CHECK(c.scenario.slice(2).requirement.tau_ms == 5.0);
  CHECK(c.scenario.slice(2).requirement.rho == 0.95);
  CHECK(c.scenario.slice(2).demand_mi == 8e4);
  CHECK(!c.scenario.slice(3).requirement.delay_bounded());
  CHECK(c.scenario.slice(3).requirement.rho == 1.0);
  CHECK(c.scenario.topology.cores.size() == 2);
  for (const auto& core : c.scenario.topology.cores) CHECK(core.mips == 3e8);
  for (const auto& s : c.scenario.slices) {
    CHECK(s.traffic.size_min == 20.0);
    CHECK(s.traffic.size_max == 65535.0);
    CHECK(s.traffic.size_dist == SizeDistribution::Uniform);
  }
}
