#pragma once

// Independent reference implementations used as test oracles, and small
// scenario builders.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "slicelab/domain.hpp"
#include "slicelab/oracle.hpp"

namespace testsupport {

// Projection onto {x >= 0, sum x <= 1} by enumerating active sets: every
// subset Z of coordinates pinned at zero, with the sum constraint either
// slack or tight. Each case has a closed-form stationary point; the answer
// is the feasible candidate closest to y (the problem is strictly convex, so
// the true minimizer is always among the candidates).
inline std::vector<double> brute_force_projection(const std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<double> best;
  double best_dist = std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<double>& x) {
    double sum = 0.0;
    for (double v : x) {
      if (v < -1e-15) return;
      sum += v;
    }
    if (sum > 1.0 + 1e-15) return;
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d += (x[i] - y[i]) * (x[i] - y[i]);
    if (d < best_dist) {
      best_dist = d;
      best = x;
    }
  };
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<double> x(n, 0.0);
    double free_sum = 0.0;
    std::size_t n_free = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) continue;
      x[i] = y[i];
      free_sum += y[i];
      ++n_free;
    }
    consider(x);
    if (n_free > 0) {
      const double theta = (free_sum - 1.0) / static_cast<double>(n_free);
      std::vector<double> t(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (!(mask & (1u << i))) t[i] = y[i] - theta;
      }
      consider(t);
    }
  }
  for (double& v : best) v = std::max(v, 0.0);
  return best;
}

inline double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// M/M/1 mean sojourn time in ms.
inline double mm1_sojourn_ms(double lambda, double mu) { return 1e3 / (mu - lambda); }

// A Poisson slice on `n_edges` links of `capacity_mbps` and one core.
inline slicelab::SliceSpec poisson_slice(slicelab::SliceId id, double rate, double size_bytes) {
  slicelab::SliceSpec s;
  s.id = id;
  s.name = "s" + std::to_string(id);
  s.requirement = {2.0, 0.999};
  s.alpha_tau = 1.0;
  s.alpha_rho = 1.0;
  s.demand_mi = 5e4;
  s.priority_rank = id;
  s.traffic.kind = slicelab::TrafficKind::Poisson;
  s.traffic.mean_rate = rate;
  s.traffic.size_min = size_bytes;
  s.traffic.size_max = size_bytes;
  return s;
}

inline slicelab::Topology topology(std::size_t n_edges, double capacity_mbps, std::size_t n_cores, double mips) {
  slicelab::Topology t;
  for (std::size_t e = 0; e < n_edges; ++e) t.edges.push_back({static_cast<int>(e), capacity_mbps});
  for (std::size_t c = 0; c < n_cores; ++c) t.cores.push_back({static_cast<int>(c), mips});
  return t;
}

// Deterministic oracle: delay = tau + f(point), throughput = 1. With
// alpha_tau = 1 and the squared hinge the penalty is f(point)^2 wherever f
// is positive.
template <typename F>
class FunctionOracle final : public slicelab::QoeOracle {
 public:
  FunctionOracle(double tau, F f) : tau_(tau), f_(f) {}
  slicelab::QoeSample evaluate(slicelab::SliceId slice, const slicelab::AllocationMatrix& alloc,
                               std::uint64_t seed) const override {
    slicelab::QoeSample s;
    s.delay_stat_ms = tau_ + f_(slice, alloc.at(slice));
    s.throughput = 1.0;
    s.seed = seed;
    return s;
  }
  slicelab::DelayStatistic statistic() const override { return {}; }

 private:
  double tau_;
  F f_;
};

}  // namespace testsupport
