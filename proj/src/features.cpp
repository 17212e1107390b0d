#include "maxent/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

namespace maxent {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::CN: return "cn";
    case FeatureKind::AA: return "aa";
    case FeatureKind::RAI: return "rai";
    case FeatureKind::PA: return "pa";
    case FeatureKind::POLY: return "poly";
  }
  return "?";
}

FeatureKind parse_feature_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "cn") return FeatureKind::CN;
  if (lower == "aa") return FeatureKind::AA;
  if (lower == "rai") return FeatureKind::RAI;
  if (lower == "pa") return FeatureKind::PA;
  if (lower == "poly") return FeatureKind::POLY;
  throw Error("unknown feature kind '" + std::string(name) + "'");
}

void FeatureSpec::validate() const {
  if (kind != FeatureKind::POLY) {
    if (!coeffs.empty()) throw Error("coefficients only apply to poly features");
    return;
  }
  if (coeffs.empty()) throw Error("poly feature needs at least one coefficient");
  bool any_positive = false;
  for (double q : coeffs) {
    if (!std::isfinite(q) || q < 0.0) throw Error("poly coefficients must be finite and non-negative");
    any_positive = any_positive || q > 0.0;
  }
  if (!any_positive) throw Error("poly feature needs a positive coefficient");
}

std::vector<double> FeatureSpec::polynomial() const {
  if (kind == FeatureKind::CN) return {0.0, 1.0};
  if (kind == FeatureKind::POLY) return coeffs;
  return {};
}

double eval_polynomial(std::span<const double> q, double x) {
  double acc = 0.0;
  for (auto it = q.rbegin(); it != q.rend(); ++it) acc = (acc + *it) * x;
  return acc;
}

NodePartition NodePartition::from_labels(std::span<const std::int64_t> labels) {
  NodePartition p;
  p.assignment.resize(labels.size());
  std::unordered_map<std::int64_t, int> ids;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, fresh] = ids.emplace(labels[i], static_cast<int>(ids.size()));
    p.assignment[i] = it->second;
  }
  p.bin_count = static_cast<int>(ids.size());
  return p;
}

NodePartition NodePartition::from_assignment(std::vector<int> assignment) {
  NodePartition p;
  int k = 0;
  for (int b : assignment) {
    if (b < 0) throw Error("negative bin id");
    k = std::max(k, b + 1);
  }
  std::vector<char> used(static_cast<std::size_t>(k), 0);
  for (int b : assignment) used[b] = 1;
  if (std::find(used.begin(), used.end(), 0) != used.end()) throw Error("partition has an empty bin");
  p.assignment = std::move(assignment);
  p.bin_count = k;
  return p;
}

BlockFeature BlockFeature::from_rows(FeatureSpec spec, NodePartition partition, MatrixXd bin_rows,
                                     VectorXd signs) {
  if (bin_rows.rows() != partition.bin_count) throw Error("bin_rows must have one row per bin");
  if (signs.size() != bin_rows.cols()) throw Error("signs must have one entry per factor column");
  BlockFeature bf;
  bf.spec_ = std::move(spec);
  bf.partition_ = std::move(partition);
  bf.bin_rows_ = std::move(bin_rows);
  bf.signs_ = std::move(signs);
  MatrixXd v = bf.bin_rows_ * bf.signs_.asDiagonal() * bf.bin_rows_.transpose();
  bf.values_ = 0.5 * (v + v.transpose());
  return bf;
}

BlockFeature BlockFeature::from_values(FeatureSpec spec, NodePartition partition, MatrixXd values) {
  if (values.rows() != partition.bin_count || values.cols() != partition.bin_count)
    throw Error("block values must be bins x bins");
  BlockFeature bf;
  bf.spec_ = std::move(spec);
  bf.partition_ = std::move(partition);
  bf.values_ = std::move(values);
  return bf;
}

double BlockFeature::pair_value(NodeId i, NodeId j) const {
  if (i == j) throw Error("pair_value is undefined for i == j");
  if (i < 0 || j < 0 || i >= num_nodes() || j >= num_nodes()) throw Error("node id out of range");
  return values_(partition_.assignment[i], partition_.assignment[j]);
}

namespace {

void check_exact_limit(const SparseGraph& g, std::int64_t exact_limit) {
  if (g.num_nodes() > exact_limit)
    throw Error("graph has " + std::to_string(g.num_nodes()) + " nodes, above the dense limit of " +
                std::to_string(exact_limit) + "; use a block-approximated feature instead");
}

// Diagonal weights of the common-neighbor kernel A W A.
VectorXd neighbor_weights(const SparseGraph& g, FeatureKind kind) {
  const auto n = g.num_nodes();
  VectorXd w(n);
  for (Index k = 0; k < n; ++k) {
    const auto dk = g.degree(static_cast<NodeId>(k));
    if (kind == FeatureKind::RAI) {
      if (dk == 0) throw Error("RAI is undefined on graphs with isolated nodes");
      w[k] = 1.0 / static_cast<double>(dk);
    } else {
      // Degree-1 nodes are never a common neighbor of two other nodes.
      w[k] = dk >= 2 ? 1.0 / std::log(static_cast<double>(dk)) : 0.0;
    }
  }
  return w;
}

}  // namespace

MatrixXd exact_feature(const SparseGraph& g, const FeatureSpec& spec, std::int64_t exact_limit) {
  spec.validate();
  check_exact_limit(g, exact_limit);
  const auto n = g.num_nodes();
  switch (spec.kind) {
    case FeatureKind::PA: {
      const VectorXd d = g.degree_vector();
      return d * d.transpose();
    }
    case FeatureKind::RAI:
    case FeatureKind::AA: {
      const Eigen::SparseMatrix<double> a = g.adjacency();
      const VectorXd w = neighbor_weights(g, spec.kind);
      Eigen::SparseMatrix<double> aw = a * w.asDiagonal();
      Eigen::SparseMatrix<double> f = aw * a;
      return MatrixXd(f);
    }
    case FeatureKind::CN:
    case FeatureKind::POLY: {
      const Eigen::SparseMatrix<double> a = g.adjacency();
      const auto q = spec.polynomial();
      MatrixXd out = MatrixXd::Zero(n, n);
      MatrixXd power = MatrixXd(a);
      for (std::size_t i = 0; i < q.size(); ++i) {
        if (i > 0) power = a * power;
        if (q[i] != 0.0) out += q[i] * power;
      }
      return out;
    }
  }
  throw Error("unsupported feature kind");
}

LowRankFactor lowrank_feature(const SparseGraph& g, const FeatureSpec& spec, int d, const EigOptions& eig) {
  spec.validate();
  const auto n = g.num_nodes();
  if (d < 1 || d > n) throw Error("feature rank d must lie in [1, n]");

  LowRankFactor out;
  if (spec.kind == FeatureKind::PA) {
    out.factor = g.degree_vector();
    out.signs = VectorXd::Ones(1);
    return out;
  }

  const Eigen::SparseMatrix<double> a = g.adjacency();
  if (spec.is_polynomial()) {
    const auto q = spec.polynomial();
    int l = static_cast<int>(std::min<std::int64_t>(2LL * d, n));
    for (;;) {
      EigPairs ep = top_eigs(a, l, eig);
      VectorXd mapped(l);
      for (int i = 0; i < l; ++i) mapped[i] = eval_polynomial(q, ep.values[i]);
      std::vector<int> order(static_cast<std::size_t>(l));
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](int x, int y) { return std::abs(mapped[x]) > std::abs(mapped[y]); });
      // With q_i >= 0, |poly(x)| <= poly(|x|): an eigenvalue not yet computed
      // has |alpha| <= |alpha_l| and cannot beat poly(|alpha_l|).
      const double ceiling = eval_polynomial(q, std::abs(ep.values[l - 1]));
      const bool enough = l == n || std::abs(mapped[order[d - 1]]) >= ceiling;
      if (enough) {
        out.factor.resize(n, d);
        out.signs.resize(d);
        for (int c = 0; c < d; ++c) {
          const double r = mapped[order[c]];
          out.factor.col(c) = ep.vectors.col(order[c]) * std::sqrt(std::abs(r));
          out.signs[c] = r < 0.0 ? -1.0 : 1.0;
        }
        out.l_used = l;
        return out;
      }
      l = static_cast<int>(std::min<std::int64_t>(2LL * l, n));
    }
  }

  // RAI / AA: A W A ~ V (L V^T W V L) V^T, split with the principal square root.
  const EigPairs ep = top_eigs(a, d, eig);
  const VectorXd w = neighbor_weights(g, spec.kind);
  const MatrixXd vl = ep.vectors * ep.values.asDiagonal();
  MatrixXd core = vl.transpose() * w.asDiagonal() * vl;
  core = 0.5 * (core + core.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(core);
  VectorXd theta = es.eigenvalues();
  const double top = std::max(1.0, theta.cwiseAbs().maxCoeff());
  if (theta.minCoeff() < -1e-8 * top)
    throw Error("RAI/AA core is not positive semidefinite (eigensolver failure?)");
  theta = theta.cwiseMax(0.0);
  const MatrixXd root = es.eigenvectors() * theta.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  out.factor = ep.vectors * root;
  out.signs = VectorXd::Ones(d);
  out.l_used = d;
  return out;
}

BlockFeature block_feature(const LowRankFactor& f, const FeatureSpec& spec, int k, const KMeansOptions& km,
                           std::uint64_t seed) {
  Clustering c = kmeanspp(f.factor, k, km, seed);
  auto bf = BlockFeature::from_rows(spec, NodePartition::from_assignment(std::move(c.assignments)),
                                    std::move(c.centroids), f.signs);
  bf.d = static_cast<int>(f.rank());
  bf.k = k;
  return bf;
}

BlockFeature degree_block_feature(const SparseGraph& g) {
  NodePartition p = NodePartition::from_labels(g.degrees());
  MatrixXd rows(p.bin_count, 1);
  for (std::size_t i = 0; i < p.assignment.size(); ++i)
    rows(p.assignment[i], 0) = static_cast<double>(g.degrees()[i]);
  const int k = p.bin_count;
  auto bf = BlockFeature::from_rows(FeatureSpec::of(FeatureKind::PA), std::move(p), std::move(rows),
                                    VectorXd::Ones(1));
  bf.d = 1;
  bf.k = k;
  return bf;
}

BlockFeature exact_block_feature(const SparseGraph& g, const FeatureSpec& spec, std::int64_t exact_limit) {
  MatrixXd f = exact_feature(g, spec, exact_limit);
  std::vector<int> ids(static_cast<std::size_t>(g.num_nodes()));
  std::iota(ids.begin(), ids.end(), 0);
  auto bf = BlockFeature::from_values(spec, NodePartition::from_assignment(std::move(ids)), std::move(f));
  bf.d = static_cast<int>(g.num_nodes());
  bf.k = static_cast<int>(g.num_nodes());
  return bf;
}

NodePartition glb_partition(std::span<const NodePartition> parts) {
  if (parts.empty()) throw Error("glb_partition needs at least one partition");
  const auto n = parts.front().num_nodes();
  for (const auto& p : parts)
    if (p.num_nodes() != n) throw Error("partitions cover different node counts");

  std::vector<int> current = parts.front().assignment;
  int bins = parts.front().bin_count;
  for (std::size_t t = 1; t < parts.size(); ++t) {
    std::unordered_map<std::uint64_t, int> ids;
    ids.reserve(static_cast<std::size_t>(bins));
    for (std::int64_t i = 0; i < n; ++i) {
      const std::uint64_t key = (static_cast<std::uint64_t>(current[i]) << 32) |
                                static_cast<std::uint32_t>(parts[t].assignment[i]);
      auto [it, fresh] = ids.emplace(key, static_cast<int>(ids.size()));
      current[i] = it->second;
    }
    bins = static_cast<int>(ids.size());
  }
  // Contiguous ids in order of first appearance.
  std::vector<std::int64_t> labels(current.begin(), current.end());
  return NodePartition::from_labels(labels);
}

namespace {

template <class PairValue>
double off_diagonal_error(const MatrixXd& exact, PairValue approx) {
  double total = 0.0;
  for (Index j = 0; j < exact.cols(); ++j)
    for (Index i = 0; i < exact.rows(); ++i) {
      if (i == j) continue;
      const double r = exact(i, j) - approx(i, j);
      total += r * r;
    }
  return std::sqrt(total);
}

}  // namespace

double approximation_error(const SparseGraph& g, const FeatureSpec& spec, const LowRankFactor& f,
                           std::int64_t exact_limit) {
  const MatrixXd exact = exact_feature(g, spec, exact_limit);
  if (f.factor.rows() != exact.rows()) throw Error("factor does not match the graph");
  const MatrixXd implied = f.implied();
  return off_diagonal_error(exact, [&](Index i, Index j) { return implied(i, j); });
}

double approximation_error(const SparseGraph& g, const FeatureSpec& spec, const BlockFeature& bf,
                           std::int64_t exact_limit) {
  const MatrixXd exact = exact_feature(g, spec, exact_limit);
  if (bf.num_nodes() != exact.rows()) throw Error("block feature does not match the graph");
  return off_diagonal_error(exact, [&](Index i, Index j) {
    return bf.block_value(bf.bin_of(static_cast<NodeId>(i)), bf.bin_of(static_cast<NodeId>(j)));
  });
}

}  // namespace maxent
