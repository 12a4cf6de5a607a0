#pragma once

// Value types shared by every part of the library: slices, their QoE
// targets and traffic, the physical topology, and resource allocations.
// Nothing here has behavior beyond accessors and validation.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace slicelab {

using SliceId = int;

// Marker for a delay that is not finite: best-effort delay bounds, unstable
// queues, and statistics over an empty set of successful requests.
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

// Slack allowed on every capacity sum so projected allocations are accepted.
inline constexpr double kCapacityTolerance = 1e-9;

inline bool is_unbounded(double v) { return !std::isfinite(v); }

struct QoeRequirement {
  double tau_ms = kUnbounded;  // E2E delay bound, kUnbounded for best effort
  double rho = 0.0;            // fraction of requests that must succeed

  bool delay_bounded() const { return std::isfinite(tau_ms); }
  bool operator==(const QoeRequirement&) const = default;
};

enum class TrafficKind { BurstyOnOff, Poisson };
enum class SizeDistribution { Uniform, Exponential };

struct TrafficModel {
  TrafficKind kind = TrafficKind::Poisson;
  double mean_rate = 1.0;    // requests per second, long-run average
  double burst_len = 1.0;    // mean packets per burst (geometric)
  double off_time_ms = 0.0;  // mean idle gap between bursts (exponential)
  double size_min = 20.0;    // bytes
  double size_max = 65535.0;
  // Uniform draws integer sizes in [size_min, size_max]. Exponential draws
  // continuous sizes with the same mean and no upper cutoff; it exists so
  // the simulator can be checked against M/M/1 closed forms.
  SizeDistribution size_dist = SizeDistribution::Uniform;

  double mean_size_bytes() const { return 0.5 * (size_min + size_max); }

  // Gap between consecutive packets of one burst, chosen so that the
  // long-run rate equals mean_rate: burst_len * gap + off_time = burst_len / rate.
  double burst_spacing_s() const {
    return 1.0 / mean_rate - off_time_ms * 1e-3 / burst_len;
  }

  bool operator==(const TrafficModel&) const = default;
};

struct SliceSpec {
  SliceId id = 0;
  std::string name;
  QoeRequirement requirement;
  double alpha_tau = 0.0;
  double alpha_rho = 0.0;
  TrafficModel traffic;
  double demand_mi = 1.0;  // million instructions per request
  int priority_rank = 0;   // lower value = higher priority

  bool operator==(const SliceSpec&) const = default;
};

struct Edge {
  int id = 0;
  double capacity_mbps = 0.0;
  bool operator==(const Edge&) const = default;
};

struct Core {
  int id = 0;
  double mips = 0.0;
  bool operator==(const Core&) const = default;
};

struct Topology {
  std::vector<Edge> edges;
  std::vector<Core> cores;
  int buffer_pkts = 100;  // router buffer per slice queue, packets in system

  std::size_t dim() const { return edges.size() + cores.size(); }
  bool operator==(const Topology&) const = default;
};

// One slice's resource point: link fractions per edge followed by CPU
// fractions per core, stored contiguously so it can be treated as a vector.
class AllocationVector {
 public:
  AllocationVector() = default;
  AllocationVector(std::size_t n_edges, std::size_t n_cores);
  AllocationVector(std::vector<double> flows, const std::vector<double>& cpu);
  static AllocationVector from_flat(std::vector<double> values, std::size_t n_edges);

  std::size_t n_edges() const { return n_edges_; }
  std::size_t n_cores() const { return values_.size() - n_edges_; }
  std::size_t dim() const { return values_.size(); }

  std::span<const double> flows() const { return {values_.data(), n_edges_}; }
  std::span<const double> cpu() const {
    return {values_.data() + n_edges_, values_.size() - n_edges_};
  }
  double flow(std::size_t e) const { return values_.at(e); }
  double cpu(std::size_t c) const { return values_.at(n_edges_ + c); }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double operator[](std::size_t d) const { return values_[d]; }
  double& operator[](std::size_t d) { return values_[d]; }

  // Sum of CPU fractions weighted by each core's speed, in MIPS.
  double cpu_mips(const Topology& topology) const;

  bool operator==(const AllocationVector&) const = default;

 private:
  std::vector<double> values_;
  std::size_t n_edges_ = 0;
};

struct AllocationMatrix {
  std::map<SliceId, AllocationVector> rows;

  const AllocationVector& at(SliceId id) const;
  AllocationVector& at(SliceId id);
  double edge_sum(std::size_t e) const;
  double core_sum(std::size_t c) const;

  bool operator==(const AllocationMatrix&) const = default;
};

// One oracle evaluation of a slice's QoE.
struct QoeSample {
  double delay_stat_ms = kUnbounded;  // over successful requests only
  double throughput = 1.0;            // successes / offered
  std::size_t n_requests = 0;
  std::vector<double> raw_delays_ms;  // optional, empty unless requested
  std::uint64_t seed = 0;

  bool operator==(const QoeSample&) const = default;
};

struct Scenario {
  std::vector<SliceSpec> slices;
  Topology topology;
  AllocationMatrix alloc;

  const SliceSpec& slice(SliceId id) const;
  bool has_slice(SliceId id) const;
  bool operator==(const Scenario&) const = default;
};

// Every violated invariant, one human-readable line each. Empty = valid.
// With `new_slice` set, also checks that the new slice outweighs every
// lower-priority slice in both penalty weights.
std::vector<std::string> check_scenario(const Scenario& scenario,
                                        std::optional<SliceId> new_slice = std::nullopt);

// Returns the scenario unchanged iff it is valid; throws InvariantViolation
// listing every problem otherwise.
const Scenario& validate_scenario(const Scenario& scenario,
                                  std::optional<SliceId> new_slice = std::nullopt);

// Slices ranked strictly below `new_slice` (the set the reconfiguration may
// degrade), ordered by (priority_rank, id).
std::vector<SliceId> lower_priority_slices(const Scenario& scenario, SliceId new_slice);

}  // namespace slicelab
