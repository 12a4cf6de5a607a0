#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "slicelab/domain.hpp"

namespace slicelab {

// Weighted hinge cost on QoE violations:
//   alpha_tau * max(0, D - tau)^p + alpha_rho * max(0, rho - T)^p
// with p = 1 (the printed linear hinge) or p = 2 (squared hinge, default).
// Delay terms are in milliseconds, so the delay part has units of ms^p.
struct PenaltyModel {
  QoeRequirement requirement;
  double alpha_tau = 0.0;
  double alpha_rho = 0.0;
  int exponent = 2;

  static PenaltyModel for_slice(const SliceSpec& slice, int exponent = 2);
};

// Throws std::invalid_argument for an exponent outside {1, 2} or negative weights.
void check_penalty_model(const PenaltyModel& model);

// Nonnegative; +inf when a bounded delay requirement meets an unbounded delay.
double penalty(const PenaltyModel& model, const QoeSample& sample);

// Same as penalty() but with the delay replaced by kDelayCapMs when it is not
// finite, so differences between two saturated points stay finite and the
// throughput term still carries a direction.
inline constexpr double kDelayCapMs = 1e6;
double capped_penalty(const PenaltyModel& model, const QoeSample& sample);

// Evaluates a slice's QoE at an allocation point with the given seed.
using PointEvaluator = std::function<QoeSample(const AllocationVector& point, std::uint64_t seed)>;

// Stencil role of a probe point. Central differences use Plus/Minus;
// coordinates within delta of a bound use the second-order one-sided
// stencil through Center and the two points on the inside.
enum class ProbeSide : int { Center = 0, Plus = 1, Minus = -1, Plus2 = 2, Minus2 = -2 };

struct ProbeRecord {
  AllocationVector point;
  QoeSample sample;
  std::uint64_t seed = 0;
  bool operator==(const ProbeRecord&) const = default;
};

// Seed for repetition `rep` of the probe at (coordinate, side). The center
// point reports coordinate == dim.
using ProbeSeedFn = std::function<std::uint64_t(std::size_t coordinate, ProbeSide side, int rep)>;

struct GradientOptions {
  double delta = 0.02;
  int probes = 1;
  ProbeSeedFn seed_for;  // defaults to hash(coordinate, side, rep)
  unsigned threads = 1;  // probe evaluations run concurrently; result is identical
};

struct GradientEstimate {
  std::vector<double> gradient;
  QoeSample center;              // statistic averaged over the probes at the point itself
  double center_penalty = 0.0;   // penalty of the averaged center sample (uncapped)
  std::vector<ProbeRecord> records;  // every oracle call, ordered by (point, rep)
};

// Finite-difference gradient of the penalty along each allocation
// coordinate. Each penalty value is computed from the delay statistic and
// throughput averaged over `probes` evaluations with distinct seeds.
// Throws DegenerateDelta unless 0 < delta <= 0.25, std::invalid_argument if
// probes < 1, and propagates evaluator failures as OracleFailure.
GradientEstimate penalty_gradient(const PenaltyModel& model, const PointEvaluator& oracle,
                                  const AllocationVector& point, const GradientOptions& options);

}  // namespace slicelab
