#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "maxent/graph.hpp"

namespace maxent {

enum class Method { LBFGS, NEWTON, DIAG_QN };

std::string to_string(Method method);
Method parse_method(std::string_view name);

struct OptimizerOpts {
  Method method = Method::LBFGS;
  double grad_tol = 1e-3;
  int max_iters = 2000;
  int lbfgs_memory = 10;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;

  void validate() const;
};

struct TraceEntry {
  int iter = 0;
  double value = 0.0;
  double grad_norm = 0.0;
  double seconds = 0.0;
};

struct OptResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iters = 0;
  bool converged = false;
  std::string message;
  std::vector<TraceEntry> trace;
};

/// Smooth objective. value_grad returns f(x) and writes the gradient; hessian
/// is only needed by Method::NEWTON. The optional Hessian diagonal, taken once
/// at x0, preconditions L-BFGS; convergence is still judged on the raw
/// gradient.
struct Objective {
  std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)> value_grad;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> hessian_diagonal;
};

/// Minimizes `f` from `x0` under a strong Wolfe line search.
///
/// Stops with converged = true once ||grad||_2 < grad_tol. A line search that
/// fails (50 interpolation steps without a Wolfe point) ends the run with
/// converged = false and a message. Throws if f(x0) is not finite.
OptResult minimize(const Objective& f, Eigen::VectorXd x0, const OptimizerOpts& opts);

}  // namespace maxent
