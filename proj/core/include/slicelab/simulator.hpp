#pragma once

// Discrete-event simulation of sliced traffic: each slice's requests cross
// every edge in order through its own FIFO link queue (rate f * B(e), finite
// buffer) and then its own FIFO server queue (rate sum_c phi_c * MIPS_c,
// unbounded). Slices never share a queue, so a slice's results depend only
// on its own allocation row and its own random stream.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "slicelab/domain.hpp"

namespace slicelab {

struct SimConfig {
  double horizon_s = 10.0;      // arrivals are generated in [0, horizon)
  double warmup_s = 1.0;        // requests created earlier are not counted
  std::uint64_t seed = 1;
  double propagation_ms = 0.1;  // fixed return-path delay added to every request
  bool keep_trace = false;      // record one PacketTraceRecord per request

  bool operator==(const SimConfig&) const = default;
};

// Throws InvariantViolation when warmup >= horizon or values are negative.
void check_sim_config(const SimConfig& config);

enum class EventKind : int { LinkDeparture = 0, ServiceCompletion = 1, BurstToggle = 2, Arrival = 3 };

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::Arrival;
  SliceId slice = 0;
  std::uint64_t packet = 0;
  std::uint32_t stage = 0;  // edge index for link departures

  // Strict ordering used by the event queue: time, then kind (departures
  // before arrivals), then packet id.
  friend bool operator<(const Event& a, const Event& b);
};

struct Packet {
  std::uint64_t id = 0;
  SliceId slice = 0;
  double size_bytes = 0.0;
  double demand_mi = 0.0;
  double created_at = 0.0;
  double link_out_at = 0.0;
  double served_at = 0.0;
  bool dropped = false;
};

struct PacketTraceRecord {
  SliceId slice = 0;
  double created_at_s = 0.0;
  double delay_ms = 0.0;  // kUnbounded when dropped
  bool dropped = false;
};

struct SliceRunResult {
  SliceId slice = 0;
  std::vector<double> delays_ms;  // successful post-warmup requests, completion order
  std::size_t offered = 0;
  std::size_t succeeded = 0;
  std::size_t dropped = 0;  // includes requests stranded behind a zero-rate stage
};

struct SimResult {
  std::vector<SliceRunResult> slices;
  std::vector<PacketTraceRecord> trace;
  std::uint64_t events = 0;

  const SliceRunResult& at(SliceId id) const;
};

// Runs the simulation. `only` restricts the run to a subset of slices
// (results for a slice are identical whether or not others are simulated).
// Allocation entries must lie in [0,1]; column sums are not checked here so
// that probe points may be evaluated in isolation.
SimResult run_sim(const Scenario& scenario, const AllocationMatrix& alloc, const SimConfig& config,
                  std::span<const SliceId> only = {});

enum class StatisticKind { Max, Mean, Percentile };

struct DelayStatistic {
  StatisticKind kind = StatisticKind::Max;
  double percentile = 95.0;  // used when kind == Percentile

  // Accepts "max", "mean", "p95", "percentile(99.9)".
  static DelayStatistic parse(const std::string& text);
  std::string to_string() const;
  // kUnbounded for an empty sample. Percentiles use nearest rank.
  double apply(std::span<const double> delays_ms) const;

  bool operator==(const DelayStatistic&) const = default;
};

// delay_stat over successful requests (kUnbounded if none); throughput =
// succeeded / offered, 1.0 when nothing was offered.
QoeSample summarize(const SliceRunResult& result, const DelayStatistic& statistic, bool keep_raw = false);

// CSV: slice,created_at_s,delay_ms,dropped
void write_trace_csv(std::ostream& out, std::span<const PacketTraceRecord> trace);

}  // namespace slicelab
