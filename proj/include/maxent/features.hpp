#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "maxent/graph.hpp"
#include "maxent/spectral.hpp"

namespace maxent {

enum class FeatureKind { CN, AA, RAI, PA, POLY };

std::string to_string(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view name);

/// Which pairwise feature matrix to build. For POLY, F = sum_i coeffs[i-1] * A^i.
struct FeatureSpec {
  FeatureKind kind = FeatureKind::CN;
  std::vector<double> coeffs;

  static FeatureSpec of(FeatureKind kind) { return {kind, {}}; }
  static FeatureSpec poly(std::vector<double> coeffs) { return {FeatureKind::POLY, std::move(coeffs)}; }

  void validate() const;

  /// Polynomial coefficients of F in A (CN is A^2). Empty for RAI/AA/PA.
  std::vector<double> polynomial() const;
  bool is_polynomial() const { return kind == FeatureKind::CN || kind == FeatureKind::POLY; }
};

/// Evaluates sum_i q[i-1] * x^i.
double eval_polynomial(std::span<const double> q, double x);

/// F ~ factor * diag(signs) * factor^T.
struct LowRankFactor {
  Eigen::MatrixXd factor;
  Eigen::VectorXd signs;
  int l_used = 0;  // eigenpairs of A computed to build the factor

  Eigen::Index rank() const { return factor.cols(); }
  Eigen::MatrixXd implied() const { return factor * signs.asDiagonal() * factor.transpose(); }
};

/// Node -> bin map with contiguous, non-empty bins.
struct NodePartition {
  std::vector<int> assignment;
  int bin_count = 0;

  /// Relabels arbitrary bin ids to 0..k-1 in order of first appearance.
  static NodePartition from_labels(std::span<const std::int64_t> labels);
  static NodePartition from_assignment(std::vector<int> assignment);
  std::int64_t num_nodes() const { return static_cast<std::int64_t>(assignment.size()); }
};

/// Block-constant approximation of a feature matrix.
///
/// Pair values depend only on the bins of the two nodes:
/// f(i, j) = block_values(b(i), b(j)). When the feature comes from a
/// factorization, bin_rows/signs hold the centroid rows and block_values =
/// bin_rows * diag(signs) * bin_rows^T; exact features wrapped with one node
/// per bin store block_values directly and leave bin_rows empty.
class BlockFeature {
 public:
  BlockFeature() = default;

  static BlockFeature from_rows(FeatureSpec spec, NodePartition partition, Eigen::MatrixXd bin_rows,
                                Eigen::VectorXd signs);
  static BlockFeature from_values(FeatureSpec spec, NodePartition partition, Eigen::MatrixXd values);

  const FeatureSpec& spec() const { return spec_; }
  const NodePartition& partition() const { return partition_; }
  const Eigen::MatrixXd& bin_rows() const { return bin_rows_; }
  const Eigen::VectorXd& signs() const { return signs_; }
  const Eigen::MatrixXd& block_values() const { return values_; }
  bool factored() const { return bin_rows_.size() > 0; }

  int bins() const { return partition_.bin_count; }
  int bin_of(NodeId i) const { return partition_.assignment[i]; }
  std::int64_t num_nodes() const { return partition_.num_nodes(); }
  double block_value(int a, int b) const { return values_(a, b); }

  /// Feature value between two distinct nodes.
  double pair_value(NodeId i, NodeId j) const;

  /// Rank and bin count requested when the feature was built (informational).
  int d = 0;
  int k = 0;

 private:
  FeatureSpec spec_;
  NodePartition partition_;
  Eigen::MatrixXd bin_rows_;
  Eigen::VectorXd signs_;
  Eigen::MatrixXd values_;
};

inline constexpr std::int64_t kDefaultExactLimit = 20000;

/// Dense n x n feature matrix. Diagonal entries are whatever the matrix
/// expression gives and are never used by the model.
Eigen::MatrixXd exact_feature(const SparseGraph& g, const FeatureSpec& spec,
                              std::int64_t exact_limit = kDefaultExactLimit);

/// Rank-d factor of the feature matrix built from the leading eigenpairs of A.
///
/// Polynomial features reuse the eigenvectors of A with eigenvalues mapped
/// through the polynomial; enough eigenpairs are computed (starting at 2d and
/// doubling) that no eigenpair left out could rank in the top d. RAI and AA use
/// V (L V^T W V L)^{1/2} with W = D^{-1} (RAI) or 1/log D (AA, degree-1 nodes
/// dropped). PA returns its exact rank-one factor, the degree vector.
LowRankFactor lowrank_feature(const SparseGraph& g, const FeatureSpec& spec, int d,
                              const EigOptions& eig = {});

/// k-means++ on the factor rows; bins become the blocks.
BlockFeature block_feature(const LowRankFactor& f, const FeatureSpec& spec, int k,
                           const KMeansOptions& km, std::uint64_t seed);

/// PA binned by unique degree; exact, with one bin per distinct degree.
BlockFeature degree_block_feature(const SparseGraph& g);

/// Exact feature wrapped with one node per bin.
BlockFeature exact_block_feature(const SparseGraph& g, const FeatureSpec& spec,
                                 std::int64_t exact_limit = kDefaultExactLimit);

/// Coarsest partition refining every input: nodes share a bin iff they share
/// one in each input.
NodePartition glb_partition(std::span<const NodePartition> parts);

/// Frobenius distance between the exact feature and an approximation, over
/// off-diagonal entries.
double approximation_error(const SparseGraph& g, const FeatureSpec& spec, const LowRankFactor& f,
                           std::int64_t exact_limit = kDefaultExactLimit);
double approximation_error(const SparseGraph& g, const FeatureSpec& spec, const BlockFeature& bf,
                           std::int64_t exact_limit = kDefaultExactLimit);

}  // namespace maxent
