#include "slicelab/domain.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

#include "slicelab/errors.hpp"

namespace slicelab {

InvariantViolation::InvariantViolation(std::vector<std::string> violations)
    : Error([&] {
        std::string msg = "invalid scenario:";
        for (const auto& v : violations) msg += "\n  " + v;
        return msg;
      }()),
      violations_(std::move(violations)) {}

ParseError::ParseError(std::string key, const std::string& what)
    : Error(fmt::format("{}: {}", key, what)), key_(std::move(key)) {}

AllocationVector::AllocationVector(std::size_t n_edges, std::size_t n_cores)
    : values_(n_edges + n_cores, 0.0), n_edges_(n_edges) {}

AllocationVector::AllocationVector(std::vector<double> flows, const std::vector<double>& cpu)
    : values_(std::move(flows)), n_edges_(values_.size()) {
  values_.insert(values_.end(), cpu.begin(), cpu.end());
}

AllocationVector AllocationVector::from_flat(std::vector<double> values, std::size_t n_edges) {
  if (n_edges > values.size()) throw DimensionMismatch("more edges than coordinates");
  AllocationVector v;
  v.values_ = std::move(values);
  v.n_edges_ = n_edges;
  return v;
}

double AllocationVector::cpu_mips(const Topology& topology) const {
  if (topology.cores.size() != n_cores()) {
    throw DimensionMismatch(fmt::format("allocation has {} cores, topology {}", n_cores(),
                                        topology.cores.size()));
  }
  double total = 0.0;
  for (std::size_t c = 0; c < n_cores(); ++c) total += cpu(c) * topology.cores[c].mips;
  return total;
}

const AllocationVector& AllocationMatrix::at(SliceId id) const {
  auto it = rows.find(id);
  if (it == rows.end()) throw DimensionMismatch(fmt::format("no allocation row for slice {}", id));
  return it->second;
}

AllocationVector& AllocationMatrix::at(SliceId id) {
  auto it = rows.find(id);
  if (it == rows.end()) throw DimensionMismatch(fmt::format("no allocation row for slice {}", id));
  return it->second;
}

double AllocationMatrix::edge_sum(std::size_t e) const {
  double s = 0.0;
  for (const auto& [id, row] : rows) s += row.flow(e);
  return s;
}

double AllocationMatrix::core_sum(std::size_t c) const {
  double s = 0.0;
  for (const auto& [id, row] : rows) s += row.cpu(c);
  return s;
}

const SliceSpec& Scenario::slice(SliceId id) const {
  auto it = std::find_if(slices.begin(), slices.end(), [&](const auto& s) { return s.id == id; });
  if (it == slices.end()) throw std::out_of_range(fmt::format("unknown slice {}", id));
  return *it;
}

bool Scenario::has_slice(SliceId id) const {
  return std::any_of(slices.begin(), slices.end(), [&](const auto& s) { return s.id == id; });
}

namespace {

void check_traffic(const SliceSpec& s, std::vector<std::string>& out) {
  const auto& t = s.traffic;
  if (!(t.mean_rate > 0.0)) out.push_back(fmt::format("slice {}: mean_rate {} must be > 0", s.id, t.mean_rate));
  if (!(t.size_min >= 20.0)) out.push_back(fmt::format("slice {}: size_min {} must be >= 20", s.id, t.size_min));
  if (!(t.size_min <= t.size_max)) {
    out.push_back(fmt::format("slice {}: size_min {} > size_max {}", s.id, t.size_min, t.size_max));
  }
  if (t.size_max > 65535.0) out.push_back(fmt::format("slice {}: size_max {} > 65535", s.id, t.size_max));
  if (t.kind == TrafficKind::BurstyOnOff) {
    if (!(t.burst_len >= 1.0)) out.push_back(fmt::format("slice {}: burst_len {} must be >= 1", s.id, t.burst_len));
    if (!(t.off_time_ms >= 0.0)) out.push_back(fmt::format("slice {}: off_time {} must be >= 0", s.id, t.off_time_ms));
    if (t.mean_rate > 0.0 && t.burst_len >= 1.0 && !(t.burst_spacing_s() > 0.0)) {
      out.push_back(fmt::format("slice {}: off_time {} ms leaves no room for {} packets per burst at {} req/s",
                                s.id, t.off_time_ms, t.burst_len, t.mean_rate));
    }
  }
}

void check_row(SliceId id, const AllocationVector& row, const Topology& topo, std::vector<std::string>& out) {
  if (row.n_edges() != topo.edges.size() || row.n_cores() != topo.cores.size()) {
    out.push_back(fmt::format("slice {}: allocation has {}+{} entries, topology needs {}+{}", id, row.n_edges(),
                              row.n_cores(), topo.edges.size(), topo.cores.size()));
    return;
  }
  for (std::size_t d = 0; d < row.dim(); ++d) {
    double v = row[d];
    if (!(v >= 0.0 && v <= 1.0)) {
      bool edge = d < row.n_edges();
      out.push_back(fmt::format("slice {}: {} {} fraction {} out of [0,1]", id, edge ? "edge" : "core",
                                edge ? d : d - row.n_edges(), v));
    }
  }
}

}  // namespace

std::vector<std::string> check_scenario(const Scenario& sc, std::optional<SliceId> new_slice) {
  std::vector<std::string> out;
  const auto& topo = sc.topology;

  if (topo.edges.empty()) out.emplace_back("topology needs at least one edge");
  if (topo.cores.empty()) out.emplace_back("topology needs at least one core");
  for (const auto& e : topo.edges) {
    if (!(e.capacity_mbps > 0.0)) out.push_back(fmt::format("edge {} capacity {} must be > 0", e.id, e.capacity_mbps));
  }
  for (const auto& c : topo.cores) {
    if (!(c.mips > 0.0)) out.push_back(fmt::format("core {} capacity {} must be > 0", c.id, c.mips));
  }
  if (topo.buffer_pkts < 1) out.push_back(fmt::format("buffer_pkts {} must be >= 1", topo.buffer_pkts));

  if (sc.slices.empty()) out.emplace_back("scenario has no slices");
  std::set<SliceId> ids;
  for (const auto& s : sc.slices) {
    if (!ids.insert(s.id).second) out.push_back(fmt::format("duplicate slice id {}", s.id));
    const auto& q = s.requirement;
    if (!(q.rho >= 0.0 && q.rho <= 1.0)) out.push_back(fmt::format("slice {}: rho out of [0,1] ({})", s.id, q.rho));
    if (!(q.tau_ms > 0.0)) out.push_back(fmt::format("slice {}: tau {} must be > 0", s.id, q.tau_ms));
    if (!(s.alpha_tau >= 0.0)) out.push_back(fmt::format("slice {}: alpha_tau {} must be >= 0", s.id, s.alpha_tau));
    if (!(s.alpha_rho >= 0.0)) out.push_back(fmt::format("slice {}: alpha_rho {} must be >= 0", s.id, s.alpha_rho));
    if (!(s.demand_mi > 0.0)) out.push_back(fmt::format("slice {}: demand_mi {} must be > 0", s.id, s.demand_mi));
    check_traffic(s, out);
  }

  for (const auto& [id, row] : sc.alloc.rows) {
    if (!ids.count(id)) out.push_back(fmt::format("allocation row for unknown slice {}", id));
    check_row(id, row, topo, out);
  }
  for (SliceId id : ids) {
    if (!sc.alloc.rows.count(id)) out.push_back(fmt::format("slice {} has no allocation row", id));
  }

  bool dims_ok = std::all_of(sc.alloc.rows.begin(), sc.alloc.rows.end(), [&](const auto& kv) {
    return kv.second.n_edges() == topo.edges.size() && kv.second.n_cores() == topo.cores.size();
  });
  if (dims_ok && !sc.alloc.rows.empty()) {
    for (std::size_t e = 0; e < topo.edges.size(); ++e) {
      double sum = sc.alloc.edge_sum(e);
      if (sum > 1.0 + kCapacityTolerance) out.push_back(fmt::format("edge {} sum {} > 1", e, sum));
    }
    for (std::size_t c = 0; c < topo.cores.size(); ++c) {
      double sum = sc.alloc.core_sum(c);
      if (sum > 1.0 + kCapacityTolerance) out.push_back(fmt::format("core {} sum {} > 1", c, sum));
    }
  }

  if (new_slice) {
    if (!ids.count(*new_slice)) {
      out.push_back(fmt::format("new slice {} is not defined", *new_slice));
    } else {
      const auto& j = sc.slice(*new_slice);
      auto lower = lower_priority_slices(sc, *new_slice);
      if (lower.empty()) out.push_back(fmt::format("new slice {} has no lower-priority slices", j.id));
      for (SliceId i : lower) {
        const auto& s = sc.slice(i);
        if (!(j.alpha_tau > s.alpha_tau && j.alpha_rho > s.alpha_rho)) {
          out.push_back(fmt::format("new slice {} weights must exceed those of lower-priority slice {}", j.id, i));
        }
      }
    }
  }
  return out;
}

const Scenario& validate_scenario(const Scenario& scenario, std::optional<SliceId> new_slice) {
  auto violations = check_scenario(scenario, new_slice);
  if (!violations.empty()) throw InvariantViolation(std::move(violations));
  return scenario;
}

std::vector<SliceId> lower_priority_slices(const Scenario& sc, SliceId new_slice) {
  const auto& j = sc.slice(new_slice);
  std::vector<const SliceSpec*> lower;
  for (const auto& s : sc.slices) {
    if (std::tie(s.priority_rank, s.id) > std::tie(j.priority_rank, j.id)) lower.push_back(&s);
  }
  std::sort(lower.begin(), lower.end(), [](const SliceSpec* a, const SliceSpec* b) {
    return std::tie(a->priority_rank, a->id) < std::tie(b->priority_rank, b->id);
  });
  std::vector<SliceId> out;
  for (const auto* s : lower) out.push_back(s->id);
  return out;
}

}  // namespace slicelab
