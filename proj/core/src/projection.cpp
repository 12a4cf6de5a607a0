#include "slicelab/projection.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include <fmt/format.h>

#include "slicelab/errors.hpp"

namespace slicelab {

std::vector<double> project_capped_simplex(std::span<const double> y) {
  std::vector<double> x(y.size());
  std::transform(y.begin(), y.end(), x.begin(), [](double v) { return std::max(v, 0.0); });
  double clipped_sum = std::accumulate(x.begin(), x.end(), 0.0);
  if (clipped_sum <= 1.0) return x;

  // Sum constraint is active: find theta with sum(max(y - theta, 0)) = 1.
  std::vector<double> sorted(y.begin(), y.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double running = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    running += sorted[k];
    double candidate = (running - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) theta = candidate;
  }
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::max(y[i] - theta, 0.0);
  return x;
}

bool ConstraintSet::contains(const AllocationMatrix& alloc, double tol) const {
  for (const auto& [id, row] : alloc.rows) {
    if (row.n_edges() != n_edges_ || row.n_cores() != n_cores_) return false;
    for (double v : row.values()) {
      if (!(v >= -tol)) return false;
    }
  }
  for (std::size_t e = 0; e < n_edges_; ++e) {
    if (alloc.edge_sum(e) > budget() + tol) return false;
  }
  for (std::size_t c = 0; c < n_cores_; ++c) {
    if (alloc.core_sum(c) > budget() + tol) return false;
  }
  return true;
}

AllocationMatrix project_constraint_set(const AllocationMatrix& alloc, const ConstraintSet& constraints) {
  for (const auto& [id, row] : alloc.rows) {
    if (row.n_edges() != constraints.n_edges() || row.n_cores() != constraints.n_cores()) {
      throw DimensionMismatch(fmt::format("slice {} allocation has {}+{} entries, constraint set expects {}+{}", id,
                                          row.n_edges(), row.n_cores(), constraints.n_edges(),
                                          constraints.n_cores()));
    }
  }
  AllocationMatrix out = alloc;
  std::vector<double> column(alloc.rows.size());
  for (std::size_t d = 0; d < constraints.n_groups(); ++d) {
    std::size_t r = 0;
    for (const auto& [id, row] : alloc.rows) column[r++] = row[d];
    auto projected = project_capped_simplex(column);
    r = 0;
    for (auto& [id, row] : out.rows) row[d] = projected[r++];
  }
  return out;
}

}  // namespace slicelab
