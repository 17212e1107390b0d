#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "detail/rng.hpp"
#include "maxent/spectral.hpp"

namespace maxent {

namespace {

// Orthogonalizes w against the first `cols` columns of v by classical
// Gram-Schmidt, repeated while a pass removes more than 1 - 1/sqrt(2) of the
// norm (at most twice). Returns the accumulated coefficients.
Eigen::VectorXd orthogonalize(const Eigen::MatrixXd& v, Eigen::Index cols, Eigen::VectorXd& w) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(cols);
  double before = w.norm();
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::VectorXd c = v.leftCols(cols).transpose() * w;
    w.noalias() -= v.leftCols(cols) * c;
    h += c;
    const double after = w.norm();
    if (after > std::sqrt(0.5) * before) break;
    before = after;
  }
  return h;
}

// Fresh unit vector orthogonal to the first `cols` columns of v.
bool random_orthogonal(const Eigen::MatrixXd& v, Eigen::Index cols, std::mt19937_64& rng,
                       Eigen::VectorXd& out) {
  std::normal_distribution<double> normal;
  for (int attempt = 0; attempt < 5; ++attempt) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal(rng);
    orthogonalize(v, cols, out);
    const double nrm = out.norm();
    if (nrm > 1e-8) {
      out /= nrm;
      return true;
    }
  }
  return false;
}

std::vector<Eigen::Index> order_by_magnitude(const Eigen::VectorXd& theta) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(theta.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(theta[a]) > std::abs(theta[b]); });
  // Magnitudes equal up to rounding (bipartite spectra give exact +-pairs)
  // count as ties; the larger value goes first.
  const double eps = 1e-10 * (theta.size() ? theta.cwiseAbs().maxCoeff() : 0.0);
  for (std::size_t b = 0; b < order.size();) {
    std::size_t e = b + 1;
    while (e < order.size() && std::abs(theta[order[e - 1]]) - std::abs(theta[order[e]]) <= eps) ++e;
    std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(b), order.begin() + static_cast<std::ptrdiff_t>(e),
                     [&](Eigen::Index x, Eigen::Index y) { return theta[x] > theta[y]; });
    b = e;
  }
  return order;
}

}  // namespace

EigPairs lanczos_top(const MatVec& apply, std::int64_t n, int l, const EigOptions& opts) {
  if (n < 1) throw Error("eigensolver needs a non-empty matrix");
  if (l < 1 || l > n) throw Error("requested eigenpair count must lie in [1, n]");

  const Eigen::Index p = std::min<Eigen::Index>(
      n, opts.subspace > 0 ? std::max(opts.subspace, l + 1) : std::max(2 * l + 20, 3 * l));
  const int max_restarts =
      opts.max_restarts > 0
          ? opts.max_restarts
          : 10 * l * std::max(1, static_cast<int>(std::ceil(std::log(static_cast<double>(n)))));
  auto rng = detail::make_rng(opts.seed, 0x1a2c05);

  Eigen::MatrixXd v(n, p + 1);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd w(n);
  {
    Eigen::VectorXd start(n);
    random_orthogonal(v, 0, rng, start);
    v.col(0) = start;
  }

  EigPairs out;
  Eigen::Index kept = 0;
  double beta = 0.0;
  Eigen::Index basis = p;  // usable basis size in this cycle
  for (int cycle = 0;; ++cycle) {
    basis = p;
    for (Eigen::Index j = kept; j < p; ++j) {
      apply(v.col(j), w);
      ++out.matvecs;
      Eigen::VectorXd h = orthogonalize(v, j + 1, w);
      t.block(0, j, j + 1, 1) = h;
      t.block(j, 0, 1, j + 1) = h.transpose();
      beta = w.norm();
      const double scale = std::max(1.0, t.topLeftCorner(j + 1, j + 1).cwiseAbs().maxCoeff());
      if (j + 1 == n) {
        // Whole space spanned; the projection is exact.
        beta = 0.0;
        basis = j + 1;
        break;
      }
      if (beta <= 1e-12 * scale) {
        // Invariant subspace: continue with a fresh direction, uncoupled.
        beta = 0.0;
        Eigen::VectorXd fresh(n);
        if (!random_orthogonal(v, j + 1, rng, fresh)) {
          basis = j + 1;
          break;
        }
        v.col(j + 1) = fresh;
        if (j + 1 < p) {
          t.block(0, j + 1, j + 1, 1).setZero();
          t.block(j + 1, 0, 1, j + 1).setZero();
        }
      } else {
        v.col(j + 1) = w / beta;
      }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.topLeftCorner(basis, basis));
    const Eigen::VectorXd& theta = es.eigenvalues();
    const Eigen::MatrixXd& y = es.eigenvectors();
    const auto order = order_by_magnitude(theta);
    const double anorm = std::max(std::abs(theta[order[0]]), 1e-300);

    double worst = 0.0;
    for (int i = 0; i < l; ++i) worst = std::max(worst, std::abs(beta * y(basis - 1, order[i])));
    const bool done = worst <= opts.tol * anorm || basis < p || basis == n;
    if (done || cycle + 1 >= max_restarts) {
      if (!done)
        throw ConvergenceError("Lanczos did not converge after " + std::to_string(cycle + 1) +
                               " restarts; worst residual " + std::to_string(worst));
      out.values.resize(l);
      Eigen::MatrixXd ysel(basis, l);
      for (int i = 0; i < l; ++i) {
        out.values[i] = theta[order[i]];
        ysel.col(i) = y.col(order[i]);
      }
      out.vectors = v.leftCols(basis) * ysel;
      for (int i = 0; i < l; ++i) {
        auto col = out.vectors.col(i);
        col.normalize();
        Eigen::Index arg;
        col.cwiseAbs().maxCoeff(&arg);
        if (col[arg] < 0) col = -col;
      }
      out.max_residual = worst;
      out.restarts = cycle;
      return out;
    }

    // Thick restart: keep the leading Ritz vectors plus the residual direction.
    kept = std::min<Eigen::Index>(p - 1, l + (p - l) / 2);
    Eigen::MatrixXd ykeep(basis, kept);
    for (Eigen::Index i = 0; i < kept; ++i) ykeep.col(i) = y.col(order[i]);
    Eigen::MatrixXd ritz = v.leftCols(basis) * ykeep;
    const Eigen::VectorXd residual = v.col(basis);
    v.leftCols(kept) = ritz;
    v.col(kept) = residual;
    t.setZero();
    for (Eigen::Index i = 0; i < kept; ++i) {
      t(i, i) = theta[order[i]];
      const double coupling = beta * y(basis - 1, order[i]);
      t(i, kept) = coupling;
      t(kept, i) = coupling;
    }
  }
}

EigPairs top_eigs(const Eigen::SparseMatrix<double>& a, int l, const EigOptions& opts) {
  if (a.rows() != a.cols()) throw Error("eigensolver needs a square matrix");
  auto apply = [&a](const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> y) {
    y.noalias() = a * x;
  };
  return lanczos_top(apply, a.rows(), l, opts);
}

EigPairs top_eigs(const SparseGraph& g, int l, const EigOptions& opts) {
  if (g.num_nodes() < 1) throw Error("eigensolver needs a non-empty graph");
  return top_eigs(g.adjacency(), l, opts);
}

}  // namespace maxent
