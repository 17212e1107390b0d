#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "maxent/graph.hpp"

namespace maxent {

/// Draws a graph in which every pair of distinct nodes, one from group g and
/// one from group h, is an edge independently with probability prob(g, h).
///
/// The number of edges in each group pair is drawn from a binomial and the
/// edges are then placed uniformly, so the cost is O(G^2 + edges) rather than
/// O(n^2). `prob` must be symmetric.
SparseGraph sample_grouped(std::int64_t n, const std::vector<std::vector<NodeId>>& members,
                           const std::function<double(int, int)>& prob, std::uint64_t seed,
                           std::vector<std::int64_t> labels = {});

}  // namespace maxent
