#include "slicelab/penalty.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "slicelab/errors.hpp"
#include "slicelab/parallel.hpp"
#include "slicelab/rng.hpp"

namespace slicelab {

PenaltyModel PenaltyModel::for_slice(const SliceSpec& slice, int exponent) {
  return PenaltyModel{slice.requirement, slice.alpha_tau, slice.alpha_rho, exponent};
}

void check_penalty_model(const PenaltyModel& m) {
  if (m.exponent != 1 && m.exponent != 2) {
    throw std::invalid_argument(fmt::format("penalty exponent must be 1 or 2, got {}", m.exponent));
  }
  if (!(m.alpha_tau >= 0.0) || !(m.alpha_rho >= 0.0)) {
    throw std::invalid_argument("penalty weights must be nonnegative");
  }
}

namespace {

double hinge(double violation, int exponent) {
  if (!(violation > 0.0)) return 0.0;
  return exponent == 2 ? violation * violation : violation;
}

double penalty_with_delay(const PenaltyModel& m, double delay_ms, double throughput) {
  double total = 0.0;
  // Best-effort slices carry no delay term at all.
  if (m.requirement.delay_bounded() && m.alpha_tau > 0.0) {
    total += m.alpha_tau * hinge(delay_ms - m.requirement.tau_ms, m.exponent);
  }
  if (m.alpha_rho > 0.0) total += m.alpha_rho * hinge(m.requirement.rho - throughput, m.exponent);
  return total;
}

struct Stencil {
  std::vector<ProbeSide> sides;  // points needed besides the center
  bool one_sided_forward = false;
  bool one_sided_backward = false;
};

Stencil stencil_for(double x, double delta) {
  if (x + delta > 1.0) return {{ProbeSide::Minus, ProbeSide::Minus2}, false, true};
  if (x - delta < 0.0) return {{ProbeSide::Plus, ProbeSide::Plus2}, true, false};
  return {{ProbeSide::Plus, ProbeSide::Minus}, false, false};
}

struct ProbePoint {
  std::size_t coordinate;
  ProbeSide side;
  AllocationVector point;
};

}  // namespace

double penalty(const PenaltyModel& m, const QoeSample& s) {
  return penalty_with_delay(m, s.delay_stat_ms, s.throughput);
}

double capped_penalty(const PenaltyModel& m, const QoeSample& s) {
  double d = std::isfinite(s.delay_stat_ms) ? std::min(s.delay_stat_ms, kDelayCapMs) : kDelayCapMs;
  return penalty_with_delay(m, d, s.throughput);
}

GradientEstimate penalty_gradient(const PenaltyModel& model, const PointEvaluator& oracle,
                                  const AllocationVector& point, const GradientOptions& opt) {
  check_penalty_model(model);
  if (!(opt.delta > 0.0) || opt.delta > 0.25) {
    throw DegenerateDelta(fmt::format("probe delta must be in (0, 0.25], got {}", opt.delta));
  }
  if (opt.probes < 1) throw std::invalid_argument("probes must be >= 1");

  const std::size_t dim = point.dim();
  const double delta = opt.delta;

  std::vector<ProbePoint> points;
  points.push_back({dim, ProbeSide::Center, point});
  std::vector<Stencil> stencils(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    stencils[d] = stencil_for(point[d], delta);
    for (ProbeSide side : stencils[d].sides) {
      AllocationVector p = point;
      p[d] = std::clamp(point[d] + static_cast<int>(side) * delta, 0.0, 1.0);
      points.push_back({d, side, std::move(p)});
    }
  }

  ProbeSeedFn seed_for = opt.seed_for;
  if (!seed_for) {
    seed_for = [](std::size_t coord, ProbeSide side, int rep) {
      return hash_seed({coord, static_cast<std::uint64_t>(static_cast<int>(side) + 8),
                        static_cast<std::uint64_t>(rep)});
    };
  }

  const std::size_t reps = static_cast<std::size_t>(opt.probes);
  auto records = parallel_map(points.size() * reps, opt.threads, [&](std::size_t job) {
    const auto& pp = points[job / reps];
    int rep = static_cast<int>(job % reps);
    std::uint64_t seed = seed_for(pp.coordinate, pp.side, rep);
    QoeSample sample;
    try {
      sample = oracle(pp.point, seed);
    } catch (const OracleFailure&) {
      throw;
    } catch (const std::exception& e) {
      throw OracleFailure(e.what());
    }
    return ProbeRecord{pp.point, std::move(sample), seed};
  });

  // Average the statistic over repetitions, then apply the penalty.
  std::vector<QoeSample> averaged(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    QoeSample avg;
    avg.delay_stat_ms = 0.0;
    avg.throughput = 0.0;
    avg.seed = records[p * reps].seed;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& s = records[p * reps + r].sample;
      avg.delay_stat_ms += s.delay_stat_ms;
      avg.throughput += s.throughput;
      avg.n_requests += s.n_requests;
    }
    avg.delay_stat_ms /= static_cast<double>(reps);
    avg.throughput /= static_cast<double>(reps);
    averaged[p] = avg;
  }

  GradientEstimate est;
  est.center = averaged[0];
  est.center_penalty = penalty(model, averaged[0]);
  est.gradient.assign(dim, 0.0);

  const double f0 = capped_penalty(model, averaged[0]);
  std::size_t idx = 1;
  for (std::size_t d = 0; d < dim; ++d) {
    double a = capped_penalty(model, averaged[idx]);
    double b = capped_penalty(model, averaged[idx + 1]);
    idx += 2;
    const auto& st = stencils[d];
    if (st.one_sided_forward) {
      est.gradient[d] = (-3.0 * f0 + 4.0 * a - b) / (2.0 * delta);
    } else if (st.one_sided_backward) {
      est.gradient[d] = (3.0 * f0 - 4.0 * a + b) / (2.0 * delta);
    } else {
      est.gradient[d] = (a - b) / (2.0 * delta);
    }
  }
  est.records = std::move(records);
  return est;
}

}  // namespace slicelab
