#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "maxent/graph.hpp"

namespace maxent {

/// Raised when an iterative solver stops before meeting its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Leading eigenpairs of a symmetric matrix.
///
/// values are sorted by decreasing absolute value (ties: larger value first);
/// the columns of vectors are orthonormal, and each column's entry of largest
/// magnitude is positive.
struct EigPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  double max_residual = 0.0;
  int restarts = 0;
  std::int64_t matvecs = 0;
};

struct EigOptions {
  double tol = 1e-8;
  int max_restarts = 0;  // 0: 10 * l * ceil(log n)
  int subspace = 0;      // Krylov basis size; 0: chosen from l
  std::uint64_t seed = 0;
};

using MatVec = std::function<void(const Eigen::Ref<const Eigen::VectorXd>&, Eigen::Ref<Eigen::VectorXd>)>;

/// Thick-restart Lanczos with full reorthogonalization for the `l` eigenpairs
/// of largest magnitude of the n x n symmetric operator `apply`.
///
/// Converged pairs satisfy ||A v - lambda v|| <= tol * ||A||. Throws
/// ConvergenceError (with the worst residual) when `max_restarts` restart
/// cycles are not enough.
EigPairs lanczos_top(const MatVec& apply, std::int64_t n, int l, const EigOptions& opts = {});

EigPairs top_eigs(const Eigen::SparseMatrix<double>& a, int l, const EigOptions& opts = {});
EigPairs top_eigs(const SparseGraph& g, int l, const EigOptions& opts = {});

/// Result of k-means: node -> bin map, k x d centroids and the objective
/// sum_i ||x_i - c_{b(i)}||^2. `trace` holds the objective after every Lloyd
/// iteration of the restart that was kept.
struct Clustering {
  std::vector<int> assignments;
  Eigen::MatrixXd centroids;
  double objective = 0.0;
  std::vector<double> trace;

  int k() const { return static_cast<int>(centroids.rows()); }
};

struct KMeansOptions {
  int restarts = 5;
  int iters = 100;
};

/// k-means with k-means++ seeding, best of `restarts` runs.
///
/// Empty clusters are reseeded with the point farthest from its centroid.
/// Duplicate points are allowed; bins may then share centroids.
Clustering kmeanspp(const Eigen::Ref<const Eigen::MatrixXd>& points, int k,
                    const KMeansOptions& opts, std::uint64_t seed);

/// Replaces every row of `u` by the centroid of its cluster.
Eigen::MatrixXd block_embed(const Eigen::Ref<const Eigen::MatrixXd>& u, const Clustering& clustering);

}  // namespace maxent
