#include <algorithm>
#include <limits>
#include <random>

#include "detail/rng.hpp"
#include "maxent/spectral.hpp"

namespace maxent {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr Index kRowBlock = 4096;

// Points and centroids are stored as columns (d x n and d x k) so that every
// per-point access is contiguous.
double sq_dist(const MatrixXd& x, Index i, const MatrixXd& c, Index j) { return (x.col(i) - c.col(j)).squaredNorm(); }

double objective(const MatrixXd& x, const std::vector<int>& assign, const MatrixXd& c) {
  double total = 0.0;
  for (Index i = 0; i < x.cols(); ++i) total += sq_dist(x, i, c, assign[i]);
  return total;
}

// Centroids as member means; empty clusters take the point farthest from its
// own centroid out of a cluster with at least two members.
void update_centroids(const MatrixXd& x, std::vector<int>& assign, MatrixXd& c) {
  const Index k = c.cols();
  std::vector<Index> size(static_cast<std::size_t>(k), 0);
  c.setZero();
  for (Index i = 0; i < x.cols(); ++i) {
    c.col(assign[i]) += x.col(i);
    ++size[assign[i]];
  }
  for (Index j = 0; j < k; ++j)
    if (size[j] > 0) c.col(j) /= static_cast<double>(size[j]);

  for (Index j = 0; j < k; ++j) {
    if (size[j] > 0) continue;
    Index far = -1;
    double best = -1.0;
    for (Index i = 0; i < x.cols(); ++i) {
      if (size[assign[i]] < 2) continue;
      const double dd = sq_dist(x, i, c, assign[i]);
      if (dd > best) {
        best = dd;
        far = i;
      }
    }
    const int old = assign[far];
    assign[far] = static_cast<int>(j);
    --size[old];
    size[j] = 1;
    c.col(j) = x.col(far);
    c.col(old).setZero();
    for (Index i = 0; i < x.cols(); ++i)
      if (assign[i] == old) c.col(old) += x.col(i);
    c.col(old) /= static_cast<double>(size[old]);
  }
}

// Nearest-centroid assignment. A point only moves when the exact distance to
// the new centroid is strictly smaller, so the objective cannot increase.
bool assign_points(const MatrixXd& x, const VectorXd& xnorm, const MatrixXd& c, std::vector<int>& assign) {
  const VectorXd cnorm = c.colwise().squaredNorm().transpose();
  bool changed = false;
  for (Index start = 0; start < x.cols(); start += kRowBlock) {
    const Index rows = std::min(kRowBlock, x.cols() - start);
    const MatrixXd dots = c.transpose() * x.middleCols(start, rows);  // k x rows
    for (Index r = 0; r < rows; ++r) {
      const Index i = start + r;
      Index arg = 0;
      double best = std::numeric_limits<double>::infinity();
      for (Index j = 0; j < c.cols(); ++j) {
        const double dd = xnorm[i] - 2.0 * dots(j, r) + cnorm[j];
        if (dd < best) {
          best = dd;
          arg = j;
        }
      }
      if (arg != assign[i] && sq_dist(x, i, c, arg) < sq_dist(x, i, c, assign[i])) {
        assign[i] = static_cast<int>(arg);
        changed = true;
      }
    }
  }
  return changed;
}

Clustering single_run(const MatrixXd& x, int k, int iters, std::mt19937_64& rng) {
  const Index n = x.cols();
  const VectorXd xnorm = x.colwise().squaredNorm().transpose();
  Clustering out;
  MatrixXd c(x.rows(), k);
  out.assignments.assign(static_cast<std::size_t>(n), 0);

  // k-means++ seeding: each new center is drawn with probability
  // proportional to the squared distance to the nearest existing center.
  std::uniform_int_distribution<Index> first(0, n - 1);
  c.col(0) = x.col(first(rng));
  VectorXd d2(n);
  for (Index i = 0; i < n; ++i) d2[i] = sq_dist(x, i, c, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int j = 1; j < k; ++j) {
    const double total = d2.sum();
    Index pick = 0;
    if (total > 0.0) {
      const double target = unif(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(rng);
    }
    c.col(j) = x.col(pick);
    for (Index i = 0; i < n; ++i) {
      const double dd = sq_dist(x, i, c, j);
      if (dd < d2[i]) {
        d2[i] = dd;
        out.assignments[i] = j;
      }
    }
  }
  // Seeded centers that coincide leave bins empty; the first update repairs them.
  out.trace.push_back(objective(x, out.assignments, c));

  for (int it = 0; it < iters; ++it) {
    update_centroids(x, out.assignments, c);
    const bool changed = assign_points(x, xnorm, c, out.assignments);
    out.trace.push_back(objective(x, out.assignments, c));
    if (!changed) break;
  }
  update_centroids(x, out.assignments, c);
  out.objective = objective(x, out.assignments, c);
  out.trace.push_back(out.objective);
  out.centroids = c.transpose();
  return out;
}

}  // namespace

Clustering kmeanspp(const Eigen::Ref<const MatrixXd>& points, int k, const KMeansOptions& opts,
                    std::uint64_t seed) {
  if (k < 1) throw Error("k-means needs at least one cluster");
  if (k > points.rows())
    throw Error("k-means: k = " + std::to_string(k) + " exceeds the number of points " +
                std::to_string(points.rows()));
  if (opts.restarts < 1) throw Error("k-means needs at least one restart");
  if (opts.iters < 0) throw Error("k-means iteration cap must be non-negative");

  const MatrixXd cols = points.transpose();
  Clustering best;
  for (int r = 0; r < opts.restarts; ++r) {
    auto rng = detail::make_rng(seed, static_cast<std::uint64_t>(r));
    Clustering run = single_run(cols, k, opts.iters, rng);
    if (r == 0 || run.objective < best.objective) best = std::move(run);
  }
  return best;
}

MatrixXd block_embed(const Eigen::Ref<const MatrixXd>& u, const Clustering& clustering) {
  if (static_cast<Index>(clustering.assignments.size()) != u.rows())
    throw Error("block_embed: clustering covers a different number of rows");
  if (clustering.centroids.cols() != u.cols())
    throw Error("block_embed: centroid dimension does not match");
  MatrixXd out(u.rows(), u.cols());
  for (Index i = 0; i < u.rows(); ++i) {
    const int b = clustering.assignments[i];
    if (b < 0 || b >= clustering.k()) throw Error("block_embed: assignment out of range");
    out.row(i) = clustering.centroids.row(b);
  }
  return out;
}

}  // namespace maxent
