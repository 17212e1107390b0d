#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/SparseCore>

namespace maxent {

using NodeId = std::int32_t;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::int64_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::int64_t line() const { return line_; }

 private:
  std::int64_t line_;
};

/// Raised when an operation needs a connected graph.
class DisconnectedGraphError : public Error {
 public:
  using Error::Error;
};

struct Edge {
  NodeId u;
  NodeId v;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected simple graph in compressed sparse (CSR) form.
///
/// Neighbor lists are sorted by node id, there are no self-loops or parallel
/// edges, and node ids are contiguous 0..n-1. `labels()[i]` is the external
/// id node i had in the input it was read from.
class SparseGraph {
 public:
  SparseGraph() = default;

  /// Builds a graph on `n` nodes. Self-loops and duplicate pairs (in either
  /// orientation) are dropped. Empty `labels` means identity labels.
  static SparseGraph from_edges(std::int64_t n, std::span<const Edge> edges,
                                std::vector<std::int64_t> labels = {});

  std::int64_t num_nodes() const { return static_cast<std::int64_t>(offsets_.empty() ? 0 : offsets_.size() - 1); }
  std::int64_t num_edges() const { return static_cast<std::int64_t>(adj_.size() / 2); }

  std::span<const NodeId> neighbors(NodeId i) const {
    return {adj_.data() + offsets_[i], static_cast<std::size_t>(offsets_[i + 1] - offsets_[i])};
  }
  std::int64_t degree(NodeId i) const { return offsets_[i + 1] - offsets_[i]; }
  const std::vector<std::int64_t>& degrees() const { return degrees_; }
  Eigen::VectorXd degree_vector() const;

  bool has_edge(NodeId i, NodeId j) const;

  /// All edges as (u, v) with u < v, sorted lexicographically.
  std::vector<Edge> edges() const;

  const std::vector<std::int64_t>& labels() const { return labels_; }
  std::optional<NodeId> index_of(std::int64_t label) const;

  /// Symmetric 0/1 adjacency matrix with 2m stored entries.
  Eigen::SparseMatrix<double> adjacency() const;

 private:
  std::vector<std::int64_t> offsets_;
  std::vector<NodeId> adj_;
  std::vector<std::int64_t> degrees_;
  std::vector<std::int64_t> labels_;
  std::unordered_map<std::int64_t, NodeId> index_;
};

struct EdgeSet {
  std::vector<Edge> pairs;
  bool positive = true;
};

/// Reads a whitespace separated edge list. Lines starting with '#' and blank
/// lines are skipped. Node ids are relabelled to 0..n-1 in order of first
/// appearance; self-loop lines introduce no nodes.
SparseGraph parse_edge_list(std::istream& in);
SparseGraph read_edge_list(const std::string& path);

/// Writes one "label label" line per edge.
void write_edge_list(std::ostream& out, const SparseGraph& g);

/// CSV with header "src,dst,label"; node ids are written as external labels.
void write_edge_set_csv(std::ostream& out, const EdgeSet& set, const SparseGraph& g);

/// Pearson correlation of endpoint degrees over both orientations of every edge.
double assortativity_coefficient(const SparseGraph& g);

bool is_connected(const SparseGraph& g);

/// Per-node component id, components numbered in order of their smallest node.
std::vector<NodeId> connected_components(const SparseGraph& g);

/// Induced subgraph on the largest connected component (labels preserved).
SparseGraph largest_component(const SparseGraph& g);

struct TrainTestSplit {
  SparseGraph train;
  EdgeSet test_pos;
};

/// Removes a random `test_fraction` of edges while keeping the rest connected.
/// A random spanning tree (Kruskal over shuffled edges) is protected and the
/// test edges are drawn uniformly from the remaining edges.
TrainTestSplit split_train_test(const SparseGraph& g, double test_fraction, std::uint64_t seed);

/// `count` distinct node pairs drawn uniformly from the non-edges of `g`.
EdgeSet sample_nonedges(const SparseGraph& g, std::int64_t count, std::uint64_t seed);

/// G(n, p) random graph; isolated nodes are kept.
SparseGraph erdos_renyi(std::int64_t n, double p, std::uint64_t seed);

}  // namespace maxent
