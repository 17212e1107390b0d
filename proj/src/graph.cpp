#include "maxent/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <unordered_set>

#include "detail/rng.hpp"

namespace maxent {

namespace {

struct UnionFind {
  std::vector<NodeId> parent;
  explicit UnionFind(std::int64_t n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  NodeId find(NodeId x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(NodeId a, NodeId b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

std::uint64_t pair_key(NodeId u, NodeId v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
         static_cast<std::uint32_t>(v);
}

}  // namespace

SparseGraph SparseGraph::from_edges(std::int64_t n, std::span<const Edge> edges,
                                    std::vector<std::int64_t> labels) {
  if (n < 0) throw Error("negative node count");
  if (!labels.empty() && static_cast<std::int64_t>(labels.size()) != n)
    throw Error("label count does not match node count");

  std::vector<Edge> canon;
  canon.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n) throw Error("edge endpoint out of range");
    if (e.u == e.v) continue;
    canon.push_back(e.u < e.v ? e : Edge{e.v, e.u});
  }
  std::sort(canon.begin(), canon.end(),
            [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
  canon.erase(std::unique(canon.begin(), canon.end()), canon.end());

  SparseGraph g;
  g.degrees_.assign(static_cast<std::size_t>(n), 0);
  for (const auto& e : canon) {
    ++g.degrees_[e.u];
    ++g.degrees_[e.v];
  }
  g.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (std::int64_t i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + g.degrees_[i];
  g.adj_.resize(2 * canon.size());
  std::vector<std::int64_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& e : canon) {
    g.adj_[fill[e.u]++] = e.v;
    g.adj_[fill[e.v]++] = e.u;
  }
  for (std::int64_t i = 0; i < n; ++i)
    std::sort(g.adj_.begin() + g.offsets_[i], g.adj_.begin() + g.offsets_[i + 1]);

  if (labels.empty()) {
    labels.resize(static_cast<std::size_t>(n));
    std::iota(labels.begin(), labels.end(), 0);
  }
  g.labels_ = std::move(labels);
  g.index_.reserve(g.labels_.size());
  for (std::size_t i = 0; i < g.labels_.size(); ++i) {
    if (!g.index_.emplace(g.labels_[i], static_cast<NodeId>(i)).second)
      throw Error("duplicate node label " + std::to_string(g.labels_[i]));
  }
  return g;
}

Eigen::VectorXd SparseGraph::degree_vector() const {
  Eigen::VectorXd d(num_nodes());
  for (std::int64_t i = 0; i < num_nodes(); ++i) d[i] = static_cast<double>(degrees_[i]);
  return d;
}

bool SparseGraph::has_edge(NodeId i, NodeId j) const {
  auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<Edge> SparseGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(static_cast<std::size_t>(num_edges()));
  for (NodeId i = 0; i < num_nodes(); ++i)
    for (NodeId j : neighbors(i))
      if (i < j) out.push_back({i, j});
  return out;
}

std::optional<NodeId> SparseGraph::index_of(std::int64_t label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Eigen::SparseMatrix<double> SparseGraph::adjacency() const {
  const auto n = num_nodes();
  Eigen::SparseMatrix<double> a(n, n);
  Eigen::VectorXi nnz(n);
  for (std::int64_t i = 0; i < n; ++i) nnz[i] = static_cast<int>(degrees_[i]);
  a.reserve(nnz);
  for (NodeId j = 0; j < n; ++j)
    for (NodeId i : neighbors(j)) a.insert(i, j) = 1.0;
  a.makeCompressed();
  return a;
}

SparseGraph parse_edge_list(std::istream& in) {
  std::vector<std::int64_t> labels;
  std::unordered_map<std::int64_t, NodeId> ids;
  std::vector<Edge> edges;
  auto intern = [&](std::int64_t label) {
    auto [it, fresh] = ids.emplace(label, static_cast<NodeId>(labels.size()));
    if (fresh) labels.push_back(label);
    return it->second;
  };

  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;
    if (line[pos] == '#') continue;

    std::int64_t tok[2];
    int count = 0;
    const char* p = line.data() + pos;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
      if (p == end) break;
      if (count == 2) throw ParseError("expected exactly two node ids", lineno);
      auto [next, ec] = std::from_chars(p, end, tok[count]);
      if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t' && *next != '\r'))
        throw ParseError("malformed node id", lineno);
      if (tok[count] < 0) throw ParseError("negative node id", lineno);
      ++count;
      p = next;
    }
    if (count != 2) throw ParseError("expected exactly two node ids", lineno);
    if (tok[0] == tok[1]) continue;
    NodeId u = intern(tok[0]);
    NodeId v = intern(tok[1]);
    edges.push_back({u, v});
  }
  if (edges.empty()) throw Error("edge list contains no edges");
  const auto n = static_cast<std::int64_t>(labels.size());
  return SparseGraph::from_edges(n, edges, std::move(labels));
}

SparseGraph read_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open edge list '" + path + "'");
  return parse_edge_list(in);
}

void write_edge_list(std::ostream& out, const SparseGraph& g) {
  const auto& labels = g.labels();
  for (const auto& e : g.edges()) out << labels[e.u] << ' ' << labels[e.v] << '\n';
}

void write_edge_set_csv(std::ostream& out, const EdgeSet& set, const SparseGraph& g) {
  const auto& labels = g.labels();
  out << "src,dst,label\n";
  for (const auto& e : set.pairs)
    out << labels[e.u] << ',' << labels[e.v] << ',' << (set.positive ? 1 : 0) << '\n';
}

double assortativity_coefficient(const SparseGraph& g) {
  if (g.num_edges() < 2) throw Error("assortativity needs at least two edges");
  // Both orientations of each edge: x and y share their marginal.
  long double sum_x = 0, sum_x2 = 0, sum_xy = 0;
  const long double count = 2.0L * static_cast<long double>(g.num_edges());
  for (const auto& e : g.edges()) {
    const long double a = static_cast<long double>(g.degree(e.u));
    const long double b = static_cast<long double>(g.degree(e.v));
    sum_x += a + b;
    sum_x2 += a * a + b * b;
    sum_xy += 2.0L * a * b;
  }
  const long double mean = sum_x / count;
  const long double var = sum_x2 / count - mean * mean;
  if (!(var > 1e-12L * std::max(1.0L, mean * mean)))
    throw Error("assortativity undefined: endpoint degrees have zero variance");
  return static_cast<double>((sum_xy / count - mean * mean) / var);
}

std::vector<NodeId> connected_components(const SparseGraph& g) {
  const auto n = g.num_nodes();
  std::vector<NodeId> comp(static_cast<std::size_t>(n), -1);
  std::vector<NodeId> stack;
  NodeId next = 0;
  for (NodeId s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (NodeId v : g.neighbors(u))
        if (comp[v] < 0) {
          comp[v] = next;
          stack.push_back(v);
        }
    }
    ++next;
  }
  return comp;
}

bool is_connected(const SparseGraph& g) {
  if (g.num_nodes() == 0) return true;
  auto comp = connected_components(g);
  return std::all_of(comp.begin(), comp.end(), [](NodeId c) { return c == 0; });
}

SparseGraph largest_component(const SparseGraph& g) {
  auto comp = connected_components(g);
  if (comp.empty()) return g;
  const auto ncomp = *std::max_element(comp.begin(), comp.end()) + 1;
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(ncomp), 0);
  for (auto c : comp) ++sizes[c];
  const auto best = static_cast<NodeId>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());

  std::vector<NodeId> remap(comp.size(), -1);
  std::vector<std::int64_t> labels;
  for (std::size_t i = 0; i < comp.size(); ++i)
    if (comp[i] == best) {
      remap[i] = static_cast<NodeId>(labels.size());
      labels.push_back(g.labels()[i]);
    }
  std::vector<Edge> edges;
  for (const auto& e : g.edges())
    if (remap[e.u] >= 0) edges.push_back({remap[e.u], remap[e.v]});
  const auto size = static_cast<std::int64_t>(labels.size());
  return SparseGraph::from_edges(size, edges, std::move(labels));
}

TrainTestSplit split_train_test(const SparseGraph& g, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0))
    throw Error("test fraction must lie in [0, 1)");
  if (!is_connected(g))
    throw DisconnectedGraphError(
        "graph is disconnected; extract the largest connected component before splitting");
  const auto n = g.num_nodes();
  const auto m = g.num_edges();
  const double removable = static_cast<double>(m - (n - 1));
  if (test_fraction * static_cast<double>(m) > removable + 1e-9)
    throw Error("infeasible test fraction: only " + std::to_string(m - (n - 1)) +
                " edges can be removed without disconnecting the graph");

  auto keep = static_cast<std::int64_t>(std::ceil((1.0 - test_fraction) * static_cast<double>(m) - 1e-9));
  keep = std::max(keep, n - 1);
  const auto remove = m - keep;

  auto rng = detail::make_rng(seed, 0x5b1170);
  auto edges = g.edges();
  std::shuffle(edges.begin(), edges.end(), rng);

  UnionFind uf(n);
  std::vector<Edge> tree, rest;
  tree.reserve(static_cast<std::size_t>(n));
  for (const auto& e : edges) (uf.unite(e.u, e.v) ? tree : rest).push_back(e);
  std::shuffle(rest.begin(), rest.end(), rng);

  TrainTestSplit out;
  out.test_pos.positive = true;
  out.test_pos.pairs.assign(rest.begin(), rest.begin() + remove);
  tree.insert(tree.end(), rest.begin() + remove, rest.end());
  out.train = SparseGraph::from_edges(n, tree, g.labels());
  return out;
}

EdgeSet sample_nonedges(const SparseGraph& g, std::int64_t count, std::uint64_t seed) {
  const auto n = g.num_nodes();
  const std::int64_t population = n * (n - 1) / 2 - g.num_edges();
  if (count < 0) throw Error("negative non-edge count");
  if (count > population)
    throw Error("requested " + std::to_string(count) + " non-edges but only " +
                std::to_string(population) + " exist");
  EdgeSet out;
  out.positive = false;
  if (count == 0) return out;
  auto rng = detail::make_rng(seed, 0x0ed6e5);

  constexpr std::int64_t kEnumerateLimit = 4'000'000;
  if (population <= kEnumerateLimit) {
    std::vector<Edge> all;
    all.reserve(static_cast<std::size_t>(population));
    for (NodeId i = 0; i < n; ++i) {
      auto nb = g.neighbors(i);
      auto it = std::upper_bound(nb.begin(), nb.end(), i);
      for (NodeId j = i + 1; j < n; ++j) {
        if (it != nb.end() && *it == j) {
          ++it;
          continue;
        }
        all.push_back({i, j});
      }
    }
    for (std::int64_t t = 0; t < count; ++t) {
      std::uniform_int_distribution<std::int64_t> pick(t, population - 1);
      std::swap(all[t], all[pick(rng)]);
    }
    all.resize(static_cast<std::size_t>(count));
    out.pairs = std::move(all);
    return out;
  }

  std::unordered_set<std::uint64_t> seen;
  seen.reserve(static_cast<std::size_t>(count) * 2);
  std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));
  while (static_cast<std::int64_t>(out.pairs.size()) < count) {
    NodeId i = node(rng), j = node(rng);
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    if (g.has_edge(i, j)) continue;
    if (!seen.insert(pair_key(i, j)).second) continue;
    out.pairs.push_back({i, j});
  }
  return out;
}

SparseGraph erdos_renyi(std::int64_t n, double p, std::uint64_t seed) {
  if (n < 1) throw Error("G(n,p) needs at least one node");
  if (!(p >= 0.0 && p <= 1.0)) throw Error("edge probability must lie in [0, 1]");
  std::vector<Edge> edges;
  if (p > 0.0) {
    auto rng = detail::make_rng(seed, 0xe7d05);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    // Geometric skipping over the lower triangle (Batagelj & Brandes).
    const double lq = std::log1p(-std::min(p, 1.0 - 1e-16));
    std::int64_t v = 1, w = -1;
    while (v < n) {
      const double r = unif(rng);
      w += 1 + (p >= 1.0 ? 0 : static_cast<std::int64_t>(std::floor(std::log1p(-r) / lq)));
      while (w >= v && v < n) {
        w -= v;
        ++v;
      }
      if (v < n) edges.push_back({static_cast<NodeId>(v), static_cast<NodeId>(w)});
    }
  }
  return SparseGraph::from_edges(n, edges);
}

}  // namespace maxent
