#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "maxent/features.hpp"
#include "maxent/graph.hpp"
#include "maxent/optimizer.hpp"

namespace maxent {

/// Multipliers are kept within [-kMultiplierCap, kMultiplierCap].
inline constexpr double kMultiplierCap = 40.0;

using FeaturePtr = std::shared_ptr<const BlockFeature>;

/// Constraints of the model: one expected-degree constraint per node (when
/// use_degrees) and one global constraint E[sum_{i<j} f_ij A_ij] = c_l per
/// feature.
struct ModelSpec {
  bool use_degrees = true;
  std::vector<FeaturePtr> features;
  std::vector<double> targets;

  void validate(std::int64_t n) const;
};

/// Targets are the block-approximated feature summed over the observed edges,
/// so the fitted model reproduces them exactly at stationarity.
ModelSpec make_model_spec(const SparseGraph& g, bool use_degrees, std::vector<FeaturePtr> features);

enum class Grouping {
  Reduced,  // one multiplier per (glb bin, degree) class
  PerNode,  // one multiplier per node
};

/// Dual problem with nodes grouped so that group members share every feature
/// row and (with degree constraints) their degree. Members of one group have
/// equal multipliers at an optimum, so one multiplier per group suffices.
struct ReducedProblem {
  std::int64_t n = 0;
  std::int64_t num_edges = 0;
  bool use_degrees = true;
  std::vector<FeaturePtr> features;
  NodePartition glb;

  std::vector<int> group_of;              // node -> group
  std::vector<std::int64_t> sizes;        // n_g
  std::vector<std::int64_t> degree;       // d_g; shared by all members only when use_degrees
  std::vector<int> group_bin;             // glb bin of each group
  std::vector<std::vector<int>> feature_bin;  // [l][g] bin of group g in feature l

  Eigen::VectorXd degree_targets;  // n_g * d_g
  Eigen::VectorXd global_targets;  // c_l
  std::int64_t unique_degrees = 0;  // distinct (glb bin, degree) pairs

  int groups() const { return static_cast<int>(sizes.size()); }
  int num_features() const { return static_cast<int>(features.size()); }
  /// Number of optimization variables: G degree multipliers (if any) + M.
  int num_params() const { return (use_degrees ? groups() : 0) + num_features(); }
  double pair_feature(int l, int g, int h) const {
    return features[l]->block_value(feature_bin[l][g], feature_bin[l][h]);
  }
  std::vector<std::vector<NodeId>> members() const;

  /// sqrt(2 k nnz) with k the glb bin count and nnz = 2 |E|.
  double lemma_bound() const;
  /// Sum over glb bins of the distinct degrees present in the bin.
  std::int64_t unique_degree_count() const;
};

ReducedProblem build_reduced(const SparseGraph& g, const ModelSpec& spec,
                             Grouping grouping = Grouping::Reduced);

/// Dual objective and gradient at x = [lambda (G, if use_degrees); gamma (M)].
/// Pairs are unordered; log(1 + e^x) is evaluated without overflow.
double dual_value_grad(const ReducedProblem& rp, const Eigen::VectorXd& x, Eigen::VectorXd& grad);
Eigen::MatrixXd dual_hessian(const ReducedProblem& rp, const Eigen::VectorXd& x);
/// Diagonal of dual_hessian at the cost of one gradient evaluation.
Eigen::VectorXd dual_hessian_diagonal(const ReducedProblem& rp, const Eigen::VectorXd& x);

struct FittedModel {
  std::shared_ptr<const ReducedProblem> reduced;
  Eigen::VectorXd lambda;  // empty when use_degrees is false
  Eigen::VectorXd gamma;
  std::vector<std::int64_t> labels;  // external id of each node

  bool converged = false;
  double grad_norm = 0.0;
  double dual_value = 0.0;
  int iterations = 0;
  std::string message;
  std::vector<std::string> warnings;
  std::vector<TraceEntry> trace;

  std::int64_t num_nodes() const { return reduced->n; }
  Eigen::VectorXd params() const;
  /// Logit of the edge probability between groups g and h at pair value
  /// f_l = pair_feature(l, g, h).
  double group_logit(int g, int h) const;
};

/// Runs the chosen optimizer from zero. Groups whose degree is 0 or n-1 have
/// no finite optimum; their multipliers are pinned at the cap with a warning.
/// Line-search failure yields converged = false, not an exception.
FittedModel fit(std::shared_ptr<const ReducedProblem> rp, const OptimizerOpts& opts = {});
FittedModel fit(const SparseGraph& g, const ModelSpec& spec, const OptimizerOpts& opts = {},
                Grouping grouping = Grouping::Reduced);

/// Model with every multiplier at zero (p = 1/2 for every pair).
FittedModel zero_model(std::shared_ptr<const ReducedProblem> rp);

double edge_logit(const FittedModel& model, NodeId i, NodeId j);
double edge_probability(const FittedModel& model, NodeId i, NodeId j);

struct ExpectedStatistics {
  Eigen::VectorXd group_degree_totals;  // sum over members of E[d_i]
  Eigen::VectorXd feature_totals;       // E[sum_{i<j} f_ij A_ij]
};

ExpectedStatistics expected_statistics(const FittedModel& model);
/// E[d_i] for every node.
Eigen::VectorXd expected_degrees(const FittedModel& model);

SparseGraph sample_graph(const FittedModel& model, std::uint64_t seed);

/// log P(g) under the model; g must be on the model's node set.
double log_likelihood(const FittedModel& model, const SparseGraph& g);

}  // namespace maxent
