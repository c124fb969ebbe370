#pragma once

#include <cstddef>
#include <vector>

namespace heis::detail {

struct FlowEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  double mass = 0.0;
};

/// Uncapacitated transportation problem on the complete bipartite graph
/// (rows → columns), solved by the primal network simplex method with a
/// strongly feasible spanning tree and block-search pivoting. `cost` is
/// row-major rows × cols; supplies and demands must have equal totals.
/// Returns the positive flows sorted by (i, j).
std::vector<FlowEntry> network_simplex(const double* cost, std::size_t rows, std::size_t cols,
                                       const double* supply, const double* demand);

}  // namespace heis::detail
