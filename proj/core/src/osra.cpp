#include "slicelab/osra.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "slicelab/errors.hpp"
#include "slicelab/projection.hpp"
#include "slicelab/rng.hpp"

namespace slicelab {

std::string to_string(StepSchedule s) {
  switch (s) {
    case StepSchedule::Constant: return "constant";
    case StepSchedule::InverseSqrt: return "inverse_sqrt";
    case StepSchedule::Normalized: return "normalized";
  }
  return "constant";
}

std::string to_string(TransferRule r) {
  return r == TransferRule::Algorithm1 ? "algorithm1" : "conservative";
}

std::string to_string(GradientCoupling c) { return c == GradientCoupling::Exchange ? "exchange" : "own"; }

StepSchedule parse_step_schedule(const std::string& t) {
  if (t == "constant") return StepSchedule::Constant;
  if (t == "inverse_sqrt") return StepSchedule::InverseSqrt;
  if (t == "normalized") return StepSchedule::Normalized;
  throw std::invalid_argument(fmt::format("unknown step schedule '{}'", t));
}

TransferRule parse_transfer_rule(const std::string& t) {
  if (t == "algorithm1") return TransferRule::Algorithm1;
  if (t == "conservative") return TransferRule::Conservative;
  throw std::invalid_argument(fmt::format("unknown transfer rule '{}'", t));
}

GradientCoupling parse_gradient_coupling(const std::string& t) {
  if (t == "exchange") return GradientCoupling::Exchange;
  if (t == "own") return GradientCoupling::Own;
  throw std::invalid_argument(fmt::format("unknown gradient coupling '{}'", t));
}

double OsraConfig::eta_for(SliceId id) const {
  auto it = eta_by_slice.find(id);
  return it == eta_by_slice.end() ? eta : it->second;
}

void check_osra_config(const OsraConfig& c) {
  std::vector<std::string> v;
  if (!(c.eta > 0.0)) v.push_back(fmt::format("osra.eta {} must be > 0", c.eta));
  for (const auto& [id, eta] : c.eta_by_slice) {
    if (!(eta >= 0.0)) v.push_back(fmt::format("osra.eta for slice {} must be >= 0", id));
  }
  if (!(c.delta > 0.0 && c.delta <= 0.25)) v.push_back(fmt::format("osra.delta {} must be in (0, 0.25]", c.delta));
  if (c.probes < 1) v.push_back(fmt::format("osra.probes {} must be >= 1", c.probes));
  if (!(c.epsilon >= 0.0)) v.push_back(fmt::format("osra.epsilon {} must be >= 0", c.epsilon));
  if (c.max_iters < 1) v.push_back(fmt::format("osra.max_iters {} must be >= 1", c.max_iters));
  if (!(c.analytic_delta > 0.0 && c.analytic_delta <= 0.25)) {
    v.push_back(fmt::format("osra.analytic_delta {} must be in (0, 0.25]", c.analytic_delta));
  }
  if (!v.empty()) throw InvariantViolation(std::move(v));
}

void ProbeMemory::append(std::vector<ProbeRecord> records) {
  entries_.insert(entries_.end(), std::make_move_iterator(records.begin()), std::make_move_iterator(records.end()));
}

bool ProbeMemory::replay(const PointEvaluator& oracle) const {
  for (const auto& e : entries_) {
    if (!(oracle(e.point, e.seed) == e.sample)) return false;
  }
  return true;
}

std::uint64_t probe_seed(const OsraProblem& problem, const OsraConfig& config, int k, std::size_t coordinate,
                         ProbeSide side, int rep) {
  const auto kk = static_cast<std::uint64_t>(k);
  const auto rr = static_cast<std::uint64_t>(rep);
  if (config.common_random_numbers) return hash_seed({problem.seed, kk, rr});
  return hash_seed({problem.seed, kk, coordinate, static_cast<std::uint64_t>(static_cast<int>(side) + 8), rr});
}

namespace {

double norm(const std::vector<double>& v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

double step_size(const OsraConfig& cfg, SliceId id, int k, const std::vector<double>& g) {
  double eta = cfg.eta_for(id);
  switch (cfg.schedule) {
    case StepSchedule::Constant: return eta;
    case StepSchedule::InverseSqrt: return eta / std::sqrt(static_cast<double>(k + 1));
    case StepSchedule::Normalized: return eta / std::max(norm(g), 1.0);
  }
  return eta;
}

}  // namespace

OsraStepResult osra_step(OsraState state, const OsraProblem& problem, const OsraConfig& cfg) {
  check_osra_config(cfg);
  if (!problem.existing_oracle || !problem.new_slice_oracle) throw std::invalid_argument("osra: oracles not set");
  const ConstraintSet constraints(problem.scenario.topology);
  if (!constraints.contains(state.alloc)) throw InvariantViolation({"osra: allocation at step start is infeasible"});

  const SliceId j = problem.new_slice;
  const auto lower = lower_priority_slices(problem.scenario, j);
  if (lower.empty()) throw InvariantViolation({fmt::format("osra: slice {} has no lower-priority slices", j)});
  const std::size_t dim = problem.scenario.topology.dim();

  IterationTrace tr;
  tr.k = state.k;
  tr.alloc = state.alloc;

  // New slice: probed gradient on the stochastic oracle.
  const auto& new_spec = problem.scenario.slice(j);
  const auto new_model = PenaltyModel::for_slice(new_spec, problem.penalty_exponent);
  PointEvaluator probe = [&](const AllocationVector& point, std::uint64_t seed) {
    AllocationMatrix m = state.alloc;
    m.at(j) = point;
    return problem.new_slice_oracle->evaluate(j, m, seed);
  };
  GradientOptions gopt;
  gopt.delta = cfg.delta;
  gopt.probes = cfg.probes;
  gopt.threads = cfg.threads;
  gopt.seed_for = [&](std::size_t coord, ProbeSide side, int rep) {
    return probe_seed(problem, cfg, state.k, coord, side, rep);
  };
  auto new_est = penalty_gradient(new_model, probe, state.alloc.at(j), gopt);
  const std::vector<double> g_new = new_est.gradient;
  tr.qoe[j] = new_est.center;
  tr.penalty[j] = new_est.center_penalty;
  tr.gradient[j] = g_new;
  state.memory.append(std::move(new_est.records));

  // Lower-priority slices: gradients on the analytic oracle, no probing cost.
  std::vector<double> transfer(dim, 0.0);
  for (SliceId i : lower) {
    const auto model = PenaltyModel::for_slice(problem.scenario.slice(i), problem.penalty_exponent);
    PointEvaluator known = [&](const AllocationVector& point, std::uint64_t seed) {
      AllocationMatrix m = state.alloc;
      m.at(i) = point;
      return problem.existing_oracle->evaluate(i, m, seed);
    };
    GradientOptions aopt;
    aopt.delta = cfg.analytic_delta;
    aopt.probes = 1;
    aopt.seed_for = [](std::size_t, ProbeSide, int) { return std::uint64_t{0}; };
    auto est = penalty_gradient(model, known, state.alloc.at(i), aopt);

    std::vector<double> g = est.gradient;
    if (cfg.coupling == GradientCoupling::Exchange) {
      for (std::size_t d = 0; d < dim; ++d) g[d] -= g_new[d];
    }
    double eta = step_size(cfg, i, state.k, g);
    for (std::size_t d = 0; d < dim; ++d) transfer[d] += eta * g[d];

    tr.qoe[i] = est.center;
    tr.penalty[i] = est.center_penalty;
    tr.gradient[i] = std::move(est.gradient);
    tr.step_gradient[i] = std::move(g);
    tr.eta[i] = eta;
  }
  tr.transfer = transfer;
  tr.stop_metric = norm(transfer);
  tr.pre_projection_change.assign(dim, 0.0);

  if (tr.stop_metric <= cfg.epsilon) {
    tr.converged = true;
    state.k += 1;
    return {std::move(state), std::move(tr)};
  }

  AllocationMatrix moved = state.alloc;
  for (SliceId i : lower) {
    auto& row = moved.at(i);
    const auto& g = tr.step_gradient.at(i);
    for (std::size_t d = 0; d < dim; ++d) row[d] -= tr.eta.at(i) * g[d];
  }
  double scale = 1.0;
  if (cfg.transfer_rule == TransferRule::Algorithm1) {
    double gn = norm(g_new);
    if (gn < 1e-12) {
      tr.fallback_conservative = true;
    } else {
      scale = 1.0 / gn;
    }
  }
  {
    auto& row = moved.at(j);
    for (std::size_t d = 0; d < dim; ++d) row[d] += scale * transfer[d];
  }
  for (const auto& [id, row] : moved.rows) {
    const auto& before = state.alloc.at(id);
    for (std::size_t d = 0; d < dim; ++d) tr.pre_projection_change[d] += row[d] - before[d];
  }

  state.alloc = project_constraint_set(moved, constraints);
  state.k += 1;
  return {std::move(state), std::move(tr)};
}

OsraResult run_osra(const AllocationMatrix& initial, const OsraProblem& problem, const OsraConfig& cfg) {
  check_osra_config(cfg);
  OsraState state;
  state.alloc = initial;
  OsraResult out;
  for (int it = 0; it < cfg.max_iters; ++it) {
    auto step = osra_step(std::move(state), problem, cfg);
    state = std::move(step.next);
    bool done = step.trace.converged;
    out.traces.push_back(std::move(step.trace));
    if (done) {
      out.converged = true;
      out.iterations = it;
      break;
    }
  }
  if (!out.converged) {
    out.max_iters_exceeded = true;
    out.iterations = cfg.max_iters;
  }
  out.final_alloc = state.alloc;
  out.memory = std::move(state.memory);
  return out;
}

}  // namespace slicelab
