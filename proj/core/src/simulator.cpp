#include "slicelab/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <map>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

#include <fmt/format.h>

#include "slicelab/errors.hpp"
#include "slicelab/rng.hpp"

namespace slicelab {

bool operator<(const Event& a, const Event& b) {
  return std::tie(a.time, a.kind, a.packet, a.slice, a.stage) <
         std::tie(b.time, b.kind, b.packet, b.slice, b.stage);
}

void check_sim_config(const SimConfig& c) {
  std::vector<std::string> v;
  if (!(c.horizon_s > 0.0)) v.push_back(fmt::format("sim.horizon {} must be > 0", c.horizon_s));
  if (!(c.warmup_s >= 0.0)) v.push_back(fmt::format("sim.warmup {} must be >= 0", c.warmup_s));
  if (!(c.warmup_s < c.horizon_s)) v.push_back(fmt::format("sim.warmup {} must be < horizon {}", c.warmup_s, c.horizon_s));
  if (!(c.propagation_ms >= 0.0)) v.push_back(fmt::format("sim.propagation {} must be >= 0", c.propagation_ms));
  if (!v.empty()) throw InvariantViolation(std::move(v));
}

const SliceRunResult& SimResult::at(SliceId id) const {
  for (const auto& s : slices) {
    if (s.slice == id) return s;
  }
  throw std::out_of_range(fmt::format("slice {} was not simulated", id));
}

namespace {

struct SliceState {
  const SliceSpec* spec = nullptr;
  Rng rng;
  std::vector<double> link_bps;
  double service_s = kUnbounded;
  std::vector<std::deque<std::uint64_t>> link_queues;
  std::deque<std::uint64_t> server_queue;
  std::uint64_t burst_remaining = 0;
  SliceRunResult result;

  SliceState(const SliceSpec& s, std::uint64_t seed) : spec(&s), rng(seed) {}
};

class Simulation {
 public:
  Simulation(const Scenario& sc, const AllocationMatrix& alloc, const SimConfig& cfg, std::span<const SliceId> only)
      : scenario_(sc), config_(cfg) {
    check_sim_config(cfg);
    for (const auto& spec : sc.slices) {
      if (!only.empty() && std::find(only.begin(), only.end(), spec.id) == only.end()) continue;
      const auto& row = alloc.at(spec.id);
      if (row.n_edges() != sc.topology.edges.size() || row.n_cores() != sc.topology.cores.size()) {
        throw DimensionMismatch(fmt::format("slice {} allocation does not match topology", spec.id));
      }
      for (double v : row.values()) {
        if (!(v >= 0.0 && v <= 1.0)) {
          throw SimulationError(fmt::format("slice {} allocation entry {} out of [0,1]", spec.id, v));
        }
      }
      auto [it, inserted] = states_.try_emplace(spec.id, spec, hash_seed({cfg.seed, static_cast<std::uint64_t>(spec.id)}));
      auto& st = it->second;
      st.result.slice = spec.id;
      for (std::size_t e = 0; e < sc.topology.edges.size(); ++e) {
        st.link_bps.push_back(row.flow(e) * sc.topology.edges[e].capacity_mbps * 1e6);
      }
      st.link_queues.resize(st.link_bps.size());
      double mips = row.cpu_mips(sc.topology);
      st.service_s = mips > 0.0 ? spec.demand_mi / mips : kUnbounded;
    }
    if (!only.empty() && states_.size() != only.size()) {
      throw std::out_of_range("run_sim: requested slice is not part of the scenario");
    }
  }

  SimResult run() {
    for (auto& [id, st] : states_) start_source(id, st);
    double now = 0.0;
    while (!events_.empty()) {
      Event ev = events_.top();
      events_.pop();
      if (ev.time < now) throw SimulationError("event queue went back in time");
      now = ev.time;
      ++out_.events;
      auto& st = states_.at(ev.slice);
      switch (ev.kind) {
        case EventKind::Arrival: on_arrival(ev, st); break;
        case EventKind::BurstToggle: on_burst_end(ev, st); break;
        case EventKind::LinkDeparture: on_link_departure(ev, st); break;
        case EventKind::ServiceCompletion: on_service_completion(ev, st); break;
      }
    }
    // Anything still queued sits behind a zero-rate stage and never completes.
    for (auto& [id, st] : states_) {
      for (auto& q : st.link_queues) {
        for (auto pid : q) drop(st, pid);
        q.clear();
      }
      for (auto pid : st.server_queue) drop(st, pid);
      st.server_queue.clear();
      out_.slices.push_back(std::move(st.result));
    }
    return std::move(out_);
  }

 private:
  void push(double time, EventKind kind, SliceId slice, std::uint64_t packet = 0, std::uint32_t stage = 0) {
    events_.push(Event{time, kind, slice, packet, stage});
  }

  bool counted(const Packet& p) const { return p.created_at >= config_.warmup_s; }

  void start_source(SliceId id, SliceState& st) {
    const auto& t = st.spec->traffic;
    if (t.kind == TrafficKind::Poisson) {
      schedule_arrival(id, st.rng.exponential(1.0 / t.mean_rate));
    } else {
      // Begin in an idle period so bursts start at a random phase.
      push(0.0, EventKind::BurstToggle, id, next_control_id());
    }
  }

  void schedule_arrival(SliceId id, double time) {
    if (time < config_.horizon_s) push(time, EventKind::Arrival, id, next_control_id());
  }

  std::uint64_t next_control_id() { return next_id_++; }

  void on_burst_end(const Event& ev, SliceState& st) {
    schedule_arrival(ev.slice, ev.time + st.rng.exponential(st.spec->traffic.off_time_ms * 1e-3));
    st.burst_remaining = 0;
  }

  double draw_size(SliceState& st) {
    const auto& t = st.spec->traffic;
    if (t.size_dist == SizeDistribution::Exponential) return st.rng.exponential(t.mean_size_bytes());
    return st.rng.uniform_int(t.size_min, t.size_max);
  }

  void on_arrival(const Event& ev, SliceState& st) {
    const auto& t = st.spec->traffic;
    Packet p;
    p.id = ev.packet;
    p.slice = ev.slice;
    p.size_bytes = draw_size(st);
    p.demand_mi = st.spec->demand_mi;
    p.created_at = ev.time;

    // Next emission from the source.
    if (t.kind == TrafficKind::Poisson) {
      schedule_arrival(ev.slice, ev.time + st.rng.exponential(1.0 / t.mean_rate));
    } else {
      if (st.burst_remaining == 0) st.burst_remaining = st.rng.geometric(t.burst_len);
      --st.burst_remaining;
      double next = ev.time + t.burst_spacing_s();
      if (st.burst_remaining > 0) {
        schedule_arrival(ev.slice, next);
      } else {
        push(next, EventKind::BurstToggle, ev.slice, next_control_id());
      }
    }

    if (counted(p)) ++st.result.offered;
    packets_.emplace(p.id, p);
    enqueue_link(st, 0, p.id, ev.time);
  }

  void enqueue_link(SliceState& st, std::size_t edge, std::uint64_t pid, double now) {
    auto& q = st.link_queues[edge];
    if (q.size() >= static_cast<std::size_t>(scenario_.topology.buffer_pkts)) {
      drop(st, pid);
      return;
    }
    q.push_back(pid);
    if (q.size() == 1) start_transmission(st, edge, now);
  }

  void start_transmission(SliceState& st, std::size_t edge, double now) {
    double rate = st.link_bps[edge];
    if (!(rate > 0.0)) return;
    const auto pid = st.link_queues[edge].front();
    double tx = packets_.at(pid).size_bytes * 8.0 / rate;
    push(now + tx, EventKind::LinkDeparture, st.result.slice, pid, static_cast<std::uint32_t>(edge));
  }

  void on_link_departure(const Event& ev, SliceState& st) {
    auto& q = st.link_queues[ev.stage];
    if (q.empty() || q.front() != ev.packet) throw SimulationError("link departure for a packet not in service");
    q.pop_front();
    if (!q.empty()) start_transmission(st, ev.stage, ev.time);

    std::size_t next_edge = ev.stage + 1;
    if (next_edge < st.link_queues.size()) {
      enqueue_link(st, next_edge, ev.packet, ev.time);
      return;
    }
    packets_.at(ev.packet).link_out_at = ev.time;
    st.server_queue.push_back(ev.packet);
    if (st.server_queue.size() == 1) start_service(st, ev.time);
  }

  void start_service(SliceState& st, double now) {
    if (!std::isfinite(st.service_s)) return;
    push(now + st.service_s, EventKind::ServiceCompletion, st.result.slice, st.server_queue.front());
  }

  void on_service_completion(const Event& ev, SliceState& st) {
    if (st.server_queue.empty() || st.server_queue.front() != ev.packet) {
      throw SimulationError("service completion for a packet not in service");
    }
    st.server_queue.pop_front();
    if (!st.server_queue.empty()) start_service(st, ev.time);

    auto node = packets_.extract(ev.packet);
    Packet& p = node.mapped();
    p.served_at = ev.time;
    double delay_ms = (p.served_at - p.created_at) * 1e3 + config_.propagation_ms;
    if (counted(p)) {
      ++st.result.succeeded;
      st.result.delays_ms.push_back(delay_ms);
    }
    if (config_.keep_trace) out_.trace.push_back({p.slice, p.created_at, delay_ms, false});
  }

  void drop(SliceState& st, std::uint64_t pid) {
    auto node = packets_.extract(pid);
    Packet& p = node.mapped();
    p.dropped = true;
    if (counted(p)) ++st.result.dropped;
    if (config_.keep_trace) out_.trace.push_back({p.slice, p.created_at, kUnbounded, true});
  }

  const Scenario& scenario_;
  SimConfig config_;
  std::map<SliceId, SliceState> states_;
  std::unordered_map<std::uint64_t, Packet> packets_;
  std::priority_queue<Event, std::vector<Event>, decltype([](const Event& a, const Event& b) { return b < a; })>
      events_;
  std::uint64_t next_id_ = 0;
  SimResult out_;
};

}  // namespace

SimResult run_sim(const Scenario& scenario, const AllocationMatrix& alloc, const SimConfig& config,
                  std::span<const SliceId> only) {
  return Simulation(scenario, alloc, config, only).run();
}

DelayStatistic DelayStatistic::parse(const std::string& text) {
  if (text == "max") return {StatisticKind::Max, 95.0};
  if (text == "mean") return {StatisticKind::Mean, 95.0};
  std::string number;
  if (text.rfind("percentile(", 0) == 0 && text.back() == ')') {
    number = text.substr(11, text.size() - 12);
  } else if (text.size() > 1 && text[0] == 'p') {
    number = text.substr(1);
  } else {
    throw std::invalid_argument(fmt::format("unknown delay statistic '{}'", text));
  }
  double p = 0.0;
  auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), p);
  if (ec != std::errc() || ptr != number.data() + number.size() || !(p > 0.0 && p <= 100.0)) {
    throw std::invalid_argument(fmt::format("bad percentile in '{}'", text));
  }
  return {StatisticKind::Percentile, p};
}

std::string DelayStatistic::to_string() const {
  switch (kind) {
    case StatisticKind::Max: return "max";
    case StatisticKind::Mean: return "mean";
    case StatisticKind::Percentile: return fmt::format("p{}", percentile);
  }
  return "max";
}

double DelayStatistic::apply(std::span<const double> d) const {
  if (d.empty()) return kUnbounded;
  switch (kind) {
    case StatisticKind::Max: return *std::max_element(d.begin(), d.end());
    case StatisticKind::Mean: {
      double s = 0.0;
      for (double v : d) s += v;
      return s / static_cast<double>(d.size());
    }
    case StatisticKind::Percentile: {
      std::vector<double> sorted(d.begin(), d.end());
      std::sort(sorted.begin(), sorted.end());
      auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * static_cast<double>(sorted.size())));
      rank = std::clamp<std::size_t>(rank, 1, sorted.size());
      return sorted[rank - 1];
    }
  }
  return kUnbounded;
}

QoeSample summarize(const SliceRunResult& r, const DelayStatistic& statistic, bool keep_raw) {
  QoeSample s;
  s.delay_stat_ms = statistic.apply(r.delays_ms);
  s.throughput = r.offered == 0 ? 1.0 : static_cast<double>(r.succeeded) / static_cast<double>(r.offered);
  s.n_requests = r.offered;
  if (keep_raw) s.raw_delays_ms = r.delays_ms;
  return s;
}

void write_trace_csv(std::ostream& out, std::span<const PacketTraceRecord> trace) {
  out << "slice,created_at_s,delay_ms,dropped\n";
  for (const auto& r : trace) {
    out << fmt::format("{},{:.9f},{},{}\n", r.slice, r.created_at_s,
                       r.dropped ? std::string("inf") : fmt::format("{:.6f}", r.delay_ms), r.dropped ? 1 : 0);
  }
}

}  // namespace slicelab
