#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "slicelab/domain.hpp"

namespace slicelab {

// Euclidean projection onto the capped simplex {x >= 0, sum(x) <= 1}.
// Negative entries are clipped first; only if the clipped sum still exceeds
// one is the sort-based threshold for the equality simplex applied.
std::vector<double> project_capped_simplex(std::span<const double> y);

// The feasible set of allocations: for every edge, the link fractions of all
// slices form one capped simplex, and likewise for every core. The groups
// share no coordinates, so projecting onto the whole set is the same as
// projecting each group independently.
class ConstraintSet {
 public:
  ConstraintSet(std::size_t n_edges, std::size_t n_cores) : n_edges_(n_edges), n_cores_(n_cores) {}
  explicit ConstraintSet(const Topology& topology)
      : ConstraintSet(topology.edges.size(), topology.cores.size()) {}

  std::size_t n_edges() const { return n_edges_; }
  std::size_t n_cores() const { return n_cores_; }
  // One group per allocation coordinate; each group spans all slices.
  std::size_t n_groups() const { return n_edges_ + n_cores_; }
  static constexpr double budget() { return 1.0; }

  bool contains(const AllocationMatrix& alloc, double tol = kCapacityTolerance) const;

 private:
  std::size_t n_edges_;
  std::size_t n_cores_;
};

AllocationMatrix project_constraint_set(const AllocationMatrix& alloc, const ConstraintSet& constraints);

}  // namespace slicelab
