#include "maxent/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>

#include <Eigen/Cholesky>

namespace maxent {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string to_string(Method method) {
  switch (method) {
    case Method::LBFGS: return "lbfgs";
    case Method::NEWTON: return "newton";
    case Method::DIAG_QN: return "diag";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "lbfgs") return Method::LBFGS;
  if (name == "newton") return Method::NEWTON;
  if (name == "diag" || name == "diag_qn") return Method::DIAG_QN;
  throw Error("unknown optimizer '" + std::string(name) + "'");
}

void OptimizerOpts::validate() const {
  if (!(wolfe_c1 > 0.0 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0))
    throw Error("Wolfe constants must satisfy 0 < c1 < c2 < 1");
  if (!(grad_tol > 0.0)) throw Error("gradient tolerance must be positive");
  if (max_iters < 0) throw Error("iteration cap must be non-negative");
  if (lbfgs_memory < 1) throw Error("L-BFGS memory must be at least 1");
}

namespace {

constexpr int kMaxZoom = 50;
constexpr int kMaxBracket = 50;
// Relative size of objective changes treated as rounding noise.
constexpr double kNoise = 1e-12;

struct Point {
  double t = 0.0;
  double f = 0.0;
  double d = 0.0;  // directional derivative
  VectorXd g;
};

// Minimizer of the cubic through two points with slopes; bisection when the
// cubic is degenerate or its minimizer leaves the safeguarded interval.
double cubic_step(const Point& a, const Point& b) {
  const double lo = std::min(a.t, b.t), hi = std::max(a.t, b.t);
  const double width = hi - lo;
  const double d1 = a.d + b.d - 3.0 * (a.f - b.f) / (a.t - b.t);
  const double disc = d1 * d1 - a.d * b.d;
  double t = 0.5 * (lo + hi);
  if (disc >= 0.0 && std::isfinite(disc)) {
    const double d2 = std::copysign(std::sqrt(disc), b.t - a.t);
    const double cand = b.t - (b.t - a.t) * (b.d + d2 - d1) / (b.d - a.d + 2.0 * d2);
    if (std::isfinite(cand) && cand > lo + 0.1 * width && cand < hi - 0.1 * width) t = cand;
  }
  return t;
}

struct LineSearchResult {
  bool ok = false;
  Point at;
};

class WolfeSearch {
 public:
  WolfeSearch(const Objective& f, const VectorXd& x, const VectorXd& p, double f0, double d0, double c1,
              double c2)
      : f_(f), x_(x), p_(p), f0_(f0), d0_(d0), c1_(c1), c2_(c2) {}

  LineSearchResult run(double t_init) {
    Point prev{0.0, f0_, d0_, {}};
    double t = t_init;
    for (int i = 0; i < kMaxBracket; ++i) {
      Point cur = eval(t);
      if (!std::isfinite(cur.f)) {
        // Overshot into a region the objective cannot evaluate; pull back.
        t = 0.5 * (prev.t + t);
        continue;
      }
      if (within_noise(cur)) return {true, std::move(cur)};
      if (cur.f > f0_ + c1_ * cur.t * d0_ || (i > 0 && cur.f >= prev.f)) return zoom(prev, cur);
      if (std::abs(cur.d) <= -c2_ * d0_) return {true, std::move(cur)};
      if (cur.d >= 0.0) return zoom(cur, prev);
      prev = std::move(cur);
      t = 2.0 * t;
    }
    return {};
  }

 private:
  // Near the optimum of a large sum, sufficient decrease drops below the
  // rounding error of f. A step that still lowers f and passes the
  // curvature test is then accepted on the strength of its gradient.
  bool within_noise(const Point& p) const {
    return std::isfinite(p.f) && p.f < f0_ && f0_ - p.f <= kNoise * (1.0 + std::abs(f0_)) &&
           std::abs(p.d) <= -c2_ * d0_;
  }

  Point eval(double t) {
    Point pt;
    pt.t = t;
    pt.g.resize(x_.size());
    pt.f = f_.value_grad(x_ + t * p_, pt.g);
    pt.d = pt.g.dot(p_);
    return pt;
  }

  LineSearchResult zoom(Point lo, Point hi) {
    for (int i = 0; i < kMaxZoom; ++i) {
      const double t = cubic_step(lo, hi);
      if (std::abs(hi.t - lo.t) <= 1e-16 * std::max(1.0, std::abs(lo.t))) break;
      Point cur = eval(t);
      if (within_noise(cur)) return {true, std::move(cur)};
      if (!std::isfinite(cur.f) || cur.f > f0_ + c1_ * t * d0_ || cur.f >= lo.f) {
        hi = std::move(cur);
        if (!std::isfinite(hi.f)) hi.f = std::numeric_limits<double>::max();
      } else {
        if (std::abs(cur.d) <= -c2_ * d0_) return {true, std::move(cur)};
        if (cur.d * (hi.t - lo.t) >= 0.0) hi = lo;
        lo = std::move(cur);
      }
    }
    // Accept a sufficient-decrease point if the curvature test never passed.
    if (lo.t > 0.0 && lo.f < f0_) return {true, std::move(lo)};
    return {};
  }

  const Objective& f_;
  const VectorXd& x_;
  const VectorXd& p_;
  double f0_, d0_, c1_, c2_;
};

// Two-loop recursion. The initial inverse Hessian is diag(h0)^{-1} scaled by
// s'y / y'diag(h0)^{-1}y from the newest pair; with h0 empty it is the usual
// scalar s'y / y'y.
VectorXd lbfgs_direction(const VectorXd& g, const std::deque<VectorXd>& s, const std::deque<VectorXd>& y,
                         const std::deque<double>& rho, const VectorXd& h0) {
  VectorXd q = -g;
  const auto m = s.size();
  std::vector<double> alpha(m);
  for (std::size_t i = m; i-- > 0;) {
    alpha[i] = rho[i] * s[i].dot(q);
    q -= alpha[i] * y[i];
  }
  if (h0.size() > 0) {
    q = q.cwiseQuotient(h0);
    if (m > 0) q *= s.back().dot(y.back()) / y.back().cwiseQuotient(h0).dot(y.back());
  } else if (m > 0) {
    q *= s.back().dot(y.back()) / y.back().squaredNorm();
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double beta = rho[i] * y[i].dot(q);
    q += (alpha[i] - beta) * s[i];
  }
  return q;
}

VectorXd newton_direction(const MatrixXd& h, const VectorXd& g) {
  const auto n = g.size();
  double tau = 1e-10;
  for (int attempt = 0; attempt < 40; ++attempt) {
    Eigen::LLT<MatrixXd> llt(h + tau * MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) {
      VectorXd p = llt.solve(-g);
      if (p.allFinite() && p.dot(g) < 0.0) return p;
    }
    tau *= 10.0;
  }
  return -g;
}

}  // namespace

OptResult minimize(const Objective& f, VectorXd x0, const OptimizerOpts& opts) {
  opts.validate();
  if (!f.value_grad) throw Error("objective has no value/gradient callback");
  if (opts.method == Method::NEWTON && !f.hessian) throw Error("Newton's method needs a Hessian callback");

  const auto clock_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  };

  OptResult res;
  res.x = std::move(x0);
  VectorXd g(res.x.size());
  double fx = f.value_grad(res.x, g);
  if (!std::isfinite(fx) || !g.allFinite()) throw Error("objective is not finite at the starting point");
  res.trace.push_back({0, fx, g.norm(), elapsed()});

  std::deque<VectorXd> mem_s, mem_y;
  std::deque<double> mem_rho;
  VectorXd diag;  // DIAG_QN Hessian diagonal estimate
  VectorXd h0;    // L-BFGS diagonal scaling, fixed at the starting point

  int iter = 0;
  while (g.norm() >= opts.grad_tol && iter < opts.max_iters) {
    VectorXd p;
    double t_init = 1.0;
    const bool first = iter == 0 || (mem_s.empty() && diag.size() == 0);
    switch (opts.method) {
      case Method::LBFGS: {
        if (f.hessian_diagonal && h0.size() == 0) {
          h0 = f.hessian_diagonal(res.x);
          const double floor = std::max(1e-300, 1e-10 * h0.cwiseAbs().maxCoeff());
          h0 = h0.cwiseMax(floor);
        }
        p = lbfgs_direction(g, mem_s, mem_y, mem_rho, h0);
        break;
      }
      case Method::NEWTON:
        p = newton_direction(f.hessian(res.x), g);
        break;
      case Method::DIAG_QN:
        p = diag.size() ? VectorXd(-g.cwiseQuotient(diag)) : VectorXd(-g);
        break;
    }
    const bool scaled = opts.method == Method::LBFGS && f.hessian_diagonal;
    if (opts.method != Method::NEWTON && !scaled && first) t_init = std::min(1.0, 1.0 / g.lpNorm<1>());
    if (!(p.dot(g) < 0.0) || !p.allFinite()) {
      p = -g;
      t_init = std::min(1.0, 1.0 / g.lpNorm<1>());
      mem_s.clear();
      mem_y.clear();
      mem_rho.clear();
      diag.resize(0);
    }

    WolfeSearch ls(f, res.x, p, fx, g.dot(p), opts.wolfe_c1, opts.wolfe_c2);
    LineSearchResult step = ls.run(t_init);
    if (!step.ok) {
      // A quasi-Newton step predicts a decrease of about -g'p / 2; below the
      // rounding noise of f no line search can confirm progress.
      res.message = -0.5 * g.dot(p) <= kNoise * (1.0 + std::abs(fx))
                        ? "line search failed: predicted decrease is below the rounding noise of the objective"
                        : "line search failed to find a Wolfe point";
      break;
    }
    ++iter;
    VectorXd s = step.at.t * p;
    VectorXd y = step.at.g - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
      if (opts.method == Method::LBFGS) {
        mem_s.push_back(s);
        mem_y.push_back(y);
        mem_rho.push_back(1.0 / sy);
        if (static_cast<int>(mem_s.size()) > opts.lbfgs_memory) {
          mem_s.pop_front();
          mem_y.pop_front();
          mem_rho.pop_front();
        }
      } else if (opts.method == Method::DIAG_QN) {
        // Weak-secant least-change update: the closest diagonal (in Frobenius
        // norm) with s'Ds = s'y. Components move in proportion to s_i^2, so
        // coordinates the step barely touched keep their estimate.
        const double scale = y.squaredNorm() / sy;
        if (diag.size() == 0) diag = VectorXd::Constant(s.size(), scale);
        const VectorXd s2 = s.cwiseAbs2();
        const double s4 = s2.squaredNorm();
        if (s4 > 0.0) diag += ((sy - s2.dot(diag)) / s4) * s2;
        diag = diag.cwiseMax(1e-6 * scale).cwiseMin(1e6 * scale);
      }
    }
    res.x += s;
    fx = step.at.f;
    g = std::move(step.at.g);
    res.trace.push_back({iter, fx, g.norm(), elapsed()});
  }

  res.value = fx;
  res.grad_norm = g.norm();
  res.iters = iter;
  res.converged = res.grad_norm < opts.grad_tol;
  if (!res.converged && res.message.empty()) res.message = "iteration cap reached";
  return res;
}

}  // namespace maxent
