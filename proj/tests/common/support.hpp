#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "maxent/graph.hpp"

namespace testing_support {

using maxent::Edge;
using maxent::NodeId;
using maxent::SparseGraph;

inline SparseGraph graph(std::int64_t n, std::vector<Edge> edges) {
  return SparseGraph::from_edges(n, edges);
}

inline SparseGraph path(int n) {
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  return graph(n, e);
}

inline SparseGraph cycle(int n) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i) e.push_back({i, (i + 1) % n});
  return graph(n, e);
}

inline SparseGraph complete(int n) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.push_back({i, j});
  return graph(n, e);
}

// Hub 0 joined to leaves 1..leaves.
inline SparseGraph star(int leaves) {
  std::vector<Edge> e;
  for (int i = 1; i <= leaves; ++i) e.push_back({0, i});
  return graph(leaves + 1, e);
}

// G(n, p) without isolated nodes: every isolated node is joined to a random
// partner. Used where features such as RAI need positive degrees.
inline SparseGraph random_graph(int n, double p, std::uint64_t seed, bool connect_isolated = true) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<Edge> e;
  std::vector<int> deg(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng)) {
        e.push_back({i, j});
        ++deg[i];
        ++deg[j];
      }
  if (connect_isolated) {
    std::uniform_int_distribution<int> pick(0, n - 2);
    for (int i = 0; i < n; ++i)
      if (deg[i] == 0) {
        int j = pick(rng);
        if (j >= i) ++j;
        e.push_back({i, j});
        ++deg[i];
        ++deg[j];
      }
  }
  return graph(n, e);
}

// Random graph with a spanning path so it is connected.
inline SparseGraph random_connected(int n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.push_back({perm[i], perm[i + 1]});
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng)) e.push_back({i, j});
  return graph(n, e);
}

inline std::string data_path(const std::string& name) {
  return std::string(MAXENT_TEST_DATA_DIR) + "/" + name;
}

}  // namespace testing_support
