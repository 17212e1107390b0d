#include "maxent/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "maxent/sampling.hpp"

namespace maxent {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// softplus(x) and sigmoid(x) sharing one exponential.
void softplus_sigmoid(double x, double& sp, double& sg) {
  const double e = std::exp(-std::abs(x));
  sp = std::max(x, 0.0) + std::log1p(e);
  sg = x >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double pair_weight(const ReducedProblem& rp, int g, int h) {
  const double ng = static_cast<double>(rp.sizes[g]);
  return g == h ? 0.5 * ng * (ng - 1.0) : ng * static_cast<double>(rp.sizes[h]);
}

double logit(const ReducedProblem& rp, const VectorXd& x, int g, int h) {
  const int nl = rp.use_degrees ? rp.groups() : 0;
  double eta = rp.use_degrees ? x[g] + x[h] : 0.0;
  for (int l = 0; l < rp.num_features(); ++l) eta += x[nl + l] * rp.pair_feature(l, g, h);
  return eta;
}

struct Sums {
  double softplus_total = 0.0;
  VectorXd degree_totals;   // per group, sum over members of expected degree
  VectorXd feature_totals;  // per feature
};

// One pass over unordered group pairs g <= h.
Sums accumulate(const ReducedProblem& rp, const VectorXd& x) {
  const int groups = rp.groups();
  const int m = rp.num_features();
  Sums s;
  s.degree_totals = VectorXd::Zero(groups);
  s.feature_totals = VectorXd::Zero(m);
  double carry = 0.0;
  for (int g = 0; g < groups; ++g) {
    for (int h = g; h < groups; ++h) {
      const double w = pair_weight(rp, g, h);
      if (w == 0.0) continue;
      double sp = 0.0, p = 0.0;
      softplus_sigmoid(logit(rp, x, g, h), sp, p);
      // Kahan summation keeps the value accurate enough for line searches
      // when the dual is a sum of millions of terms.
      const double term = w * sp - carry;
      const double next = s.softplus_total + term;
      carry = (next - s.softplus_total) - term;
      s.softplus_total = next;
      if (g == h) {
        s.degree_totals[g] += 2.0 * w * p;
      } else {
        s.degree_totals[g] += w * p;
        s.degree_totals[h] += w * p;
      }
      for (int l = 0; l < m; ++l) s.feature_totals[l] += w * p * rp.pair_feature(l, g, h);
    }
  }
  return s;
}

void check_params(const ReducedProblem& rp, const VectorXd& x) {
  if (x.size() != rp.num_params())
    throw Error("parameter vector has length " + std::to_string(x.size()) + ", expected " +
                std::to_string(rp.num_params()));
  if (!x.allFinite()) throw Error("dual evaluated at non-finite parameters");
}

}  // namespace

void ModelSpec::validate(std::int64_t n) const {
  if (!use_degrees && features.empty()) throw Error("model has no constraints");
  if (targets.size() != features.size()) throw Error("one target is needed per global feature");
  for (std::size_t l = 0; l < features.size(); ++l) {
    if (!features[l]) throw Error("null feature in model spec");
    if (features[l]->num_nodes() != n)
      throw Error("feature " + std::to_string(l) + " covers " + std::to_string(features[l]->num_nodes()) +
                  " nodes but the graph has " + std::to_string(n));
    if (!std::isfinite(targets[l])) throw Error("feature target is not finite");
  }
}

ModelSpec make_model_spec(const SparseGraph& g, bool use_degrees, std::vector<FeaturePtr> features) {
  ModelSpec spec;
  spec.use_degrees = use_degrees;
  for (const auto& f : features) {
    if (!f) throw Error("null feature in model spec");
    if (f->num_nodes() != g.num_nodes()) throw Error("feature node count does not match the graph");
    double c = 0.0;
    for (const Edge& e : g.edges()) c += f->pair_value(e.u, e.v);
    spec.targets.push_back(c);
  }
  spec.features = std::move(features);
  spec.validate(g.num_nodes());
  return spec;
}

std::vector<std::vector<NodeId>> ReducedProblem::members() const {
  std::vector<std::vector<NodeId>> out(static_cast<std::size_t>(groups()));
  for (std::int64_t i = 0; i < n; ++i) out[group_of[i]].push_back(static_cast<NodeId>(i));
  return out;
}

double ReducedProblem::lemma_bound() const {
  return std::sqrt(2.0 * glb.bin_count * 2.0 * static_cast<double>(num_edges));
}

std::int64_t ReducedProblem::unique_degree_count() const { return unique_degrees; }

ReducedProblem build_reduced(const SparseGraph& g, const ModelSpec& spec, Grouping grouping) {
  const std::int64_t n = g.num_nodes();
  spec.validate(n);

  ReducedProblem rp;
  rp.n = n;
  rp.num_edges = g.num_edges();
  rp.use_degrees = spec.use_degrees;
  rp.features = spec.features;
  if (spec.features.empty()) {
    rp.glb = NodePartition::from_assignment(std::vector<int>(static_cast<std::size_t>(n), 0));
  } else {
    std::vector<NodePartition> parts;
    for (const auto& f : spec.features) parts.push_back(f->partition());
    rp.glb = glb_partition(parts);
  }

  const auto& deg = g.degrees();
  std::set<std::pair<int, std::int64_t>> bin_degree;
  for (std::int64_t i = 0; i < n; ++i) bin_degree.emplace(rp.glb.assignment[i], deg[i]);
  rp.unique_degrees = static_cast<std::int64_t>(bin_degree.size());

  std::unordered_map<std::int64_t, int> index;
  std::vector<NodeId> rep;
  rp.group_of.resize(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    std::int64_t key = i;
    if (grouping == Grouping::Reduced) {
      key = static_cast<std::int64_t>(rp.glb.assignment[i]) * (n + 1) + (spec.use_degrees ? deg[i] : 0);
    }
    auto [it, fresh] = index.emplace(key, static_cast<int>(rep.size()));
    if (fresh) {
      rep.push_back(static_cast<NodeId>(i));
      rp.sizes.push_back(0);
    }
    rp.group_of[i] = it->second;
    ++rp.sizes[it->second];
  }

  const int groups = rp.groups();
  rp.degree.resize(groups);
  rp.group_bin.resize(groups);
  rp.degree_targets.resize(groups);
  for (int c = 0; c < groups; ++c) {
    rp.group_bin[c] = rp.glb.assignment[rep[c]];
    rp.degree[c] = deg[rep[c]];
    rp.degree_targets[c] = spec.use_degrees ? static_cast<double>(rp.sizes[c] * rp.degree[c]) : 0.0;
  }
  rp.feature_bin.resize(spec.features.size());
  for (std::size_t l = 0; l < spec.features.size(); ++l) {
    rp.feature_bin[l].resize(groups);
    for (int c = 0; c < groups; ++c) rp.feature_bin[l][c] = spec.features[l]->bin_of(rep[c]);
  }
  rp.global_targets = Eigen::Map<const VectorXd>(spec.targets.data(), static_cast<Eigen::Index>(spec.targets.size()));
  return rp;
}

double dual_value_grad(const ReducedProblem& rp, const VectorXd& x, VectorXd& grad) {
  check_params(rp, x);
  const Sums s = accumulate(rp, x);
  const int nl = rp.use_degrees ? rp.groups() : 0;
  const int m = rp.num_features();
  grad.resize(rp.num_params());
  double value = s.softplus_total;
  if (rp.use_degrees) {
    grad.head(nl) = s.degree_totals - rp.degree_targets;
    value -= x.head(nl).dot(rp.degree_targets);
  }
  grad.tail(m) = s.feature_totals - rp.global_targets;
  value -= x.tail(m).dot(rp.global_targets);
  return value;
}

MatrixXd dual_hessian(const ReducedProblem& rp, const VectorXd& x) {
  check_params(rp, x);
  const int groups = rp.groups();
  const int nl = rp.use_degrees ? groups : 0;
  const int m = rp.num_features();
  MatrixXd h = MatrixXd::Zero(rp.num_params(), rp.num_params());
  VectorXd f(m);
  for (int g = 0; g < groups; ++g) {
    for (int b = g; b < groups; ++b) {
      const double w = pair_weight(rp, g, b);
      if (w == 0.0) continue;
      const double p = sigmoid(logit(rp, x, g, b));
      const double c = w * p * (1.0 - p);
      for (int l = 0; l < m; ++l) f[l] = rp.pair_feature(l, g, b);
      if (rp.use_degrees) {
        if (g == b) {
          h(g, g) += 4.0 * c;
          for (int l = 0; l < m; ++l) h(g, nl + l) += 2.0 * c * f[l];
        } else {
          h(g, g) += c;
          h(b, b) += c;
          h(g, b) += c;
          h(b, g) += c;
          for (int l = 0; l < m; ++l) {
            h(g, nl + l) += c * f[l];
            h(b, nl + l) += c * f[l];
          }
        }
      }
      for (int l = 0; l < m; ++l)
        for (int r = 0; r < m; ++r) h(nl + l, nl + r) += c * f[l] * f[r];
    }
  }
  if (rp.use_degrees) h.bottomLeftCorner(m, nl) = h.topRightCorner(nl, m).transpose();
  return h;
}

VectorXd dual_hessian_diagonal(const ReducedProblem& rp, const VectorXd& x) {
  check_params(rp, x);
  const int groups = rp.groups();
  const int nl = rp.use_degrees ? groups : 0;
  const int m = rp.num_features();
  VectorXd d = VectorXd::Zero(rp.num_params());
  for (int g = 0; g < groups; ++g) {
    for (int b = g; b < groups; ++b) {
      const double w = pair_weight(rp, g, b);
      if (w == 0.0) continue;
      const double p = sigmoid(logit(rp, x, g, b));
      const double c = w * p * (1.0 - p);
      if (rp.use_degrees) {
        if (g == b) {
          d[g] += 4.0 * c;
        } else {
          d[g] += c;
          d[b] += c;
        }
      }
      for (int l = 0; l < m; ++l) {
        const double f = rp.pair_feature(l, g, b);
        d[nl + l] += c * f * f;
      }
    }
  }
  return d;
}

VectorXd FittedModel::params() const {
  VectorXd x(lambda.size() + gamma.size());
  x << lambda, gamma;
  return x;
}

double FittedModel::group_logit(int g, int h) const {
  const ReducedProblem& rp = *reduced;
  double eta = rp.use_degrees ? lambda[g] + lambda[h] : 0.0;
  for (int l = 0; l < rp.num_features(); ++l) eta += gamma[l] * rp.pair_feature(l, g, h);
  return eta;
}

namespace {

std::vector<std::int64_t> identity_labels(std::int64_t n) {
  std::vector<std::int64_t> out(static_cast<std::size_t>(n));
  std::iota(out.begin(), out.end(), std::int64_t{0});
  return out;
}

void unpack(FittedModel& model, const VectorXd& x) {
  const int nl = model.reduced->use_degrees ? model.reduced->groups() : 0;
  model.lambda = x.head(nl);
  model.gamma = x.tail(model.reduced->num_features());
}

}  // namespace

FittedModel zero_model(std::shared_ptr<const ReducedProblem> rp) {
  FittedModel model;
  model.reduced = std::move(rp);
  unpack(model, VectorXd::Zero(model.reduced->num_params()));
  model.labels = identity_labels(model.reduced->n);
  return model;
}

FittedModel fit(std::shared_ptr<const ReducedProblem> rp, const OptimizerOpts& opts) {
  if (!rp) throw Error("fit: null problem");
  FittedModel model = zero_model(rp);
  const int np = rp->num_params();

  // Degree 0 or n-1 forces probabilities 0 or 1 for every pair of the group:
  // the multiplier diverges, so it is fixed at the cap.
  VectorXd x = VectorXd::Zero(np);
  std::vector<int> free;
  int pinned = 0;
  for (int i = 0; i < np; ++i) {
    if (rp->use_degrees && i < rp->groups() && rp->n > 1) {
      if (rp->degree[i] == 0) {
        x[i] = -kMultiplierCap;
        ++pinned;
        continue;
      }
      if (rp->degree[i] == rp->n - 1) {
        x[i] = kMultiplierCap;
        ++pinned;
        continue;
      }
    }
    free.push_back(i);
  }
  if (pinned > 0)
    model.warnings.push_back(std::to_string(pinned) +
                             " degree group(s) at degree 0 or n-1; multipliers fixed at the cap");

  auto expand = [&](const VectorXd& y) {
    VectorXd full = x;
    for (std::size_t k = 0; k < free.size(); ++k) full[free[k]] = y[static_cast<Eigen::Index>(k)];
    return full;
  };
  Objective obj;
  obj.value_grad = [&](const VectorXd& y, VectorXd& gy) {
    VectorXd gfull;
    const double v = dual_value_grad(*rp, expand(y), gfull);
    gy.resize(y.size());
    for (std::size_t k = 0; k < free.size(); ++k) gy[static_cast<Eigen::Index>(k)] = gfull[free[k]];
    return v;
  };
  obj.hessian_diagonal = [&](const VectorXd& y) {
    const VectorXd d = dual_hessian_diagonal(*rp, expand(y));
    VectorXd out(y.size());
    for (std::size_t k = 0; k < free.size(); ++k) out[static_cast<Eigen::Index>(k)] = d[free[k]];
    return out;
  };
  obj.hessian = [&](const VectorXd& y) {
    const MatrixXd h = dual_hessian(*rp, expand(y));
    const auto nf = static_cast<Eigen::Index>(free.size());
    MatrixXd out(nf, nf);
    for (Eigen::Index a = 0; a < nf; ++a)
      for (Eigen::Index b = 0; b < nf; ++b) out(a, b) = h(free[a], free[b]);
    return out;
  };

  OptResult res = minimize(obj, VectorXd::Zero(static_cast<Eigen::Index>(free.size())), opts);
  x = expand(res.x);
  model.converged = res.converged;
  model.grad_norm = res.grad_norm;
  model.iterations = res.iters;
  model.message = res.message;
  model.trace = std::move(res.trace);

  const Eigen::Index over = (x.array().abs() > kMultiplierCap).count();
  if (over > 0) {
    model.warnings.push_back(std::to_string(over) + " multiplier(s) exceeded the cap and were clamped");
    x = x.cwiseMax(-kMultiplierCap).cwiseMin(kMultiplierCap);
  }
  unpack(model, x);
  VectorXd grad;
  model.dual_value = dual_value_grad(*rp, x, grad);
  return model;
}

FittedModel fit(const SparseGraph& g, const ModelSpec& spec, const OptimizerOpts& opts, Grouping grouping) {
  auto rp = std::make_shared<const ReducedProblem>(build_reduced(g, spec, grouping));
  FittedModel model = fit(std::move(rp), opts);
  model.labels = g.labels();
  return model;
}

double edge_logit(const FittedModel& model, NodeId i, NodeId j) {
  const std::int64_t n = model.num_nodes();
  if (i < 0 || j < 0 || i >= n || j >= n) throw Error("node id out of range");
  if (i == j) throw Error("edge probability is undefined for a self-pair");
  return model.group_logit(model.reduced->group_of[i], model.reduced->group_of[j]);
}

double edge_probability(const FittedModel& model, NodeId i, NodeId j) {
  return sigmoid(edge_logit(model, i, j));
}

ExpectedStatistics expected_statistics(const FittedModel& model) {
  Sums s = accumulate(*model.reduced, model.params());
  return {std::move(s.degree_totals), std::move(s.feature_totals)};
}

VectorXd expected_degrees(const FittedModel& model) {
  const ReducedProblem& rp = *model.reduced;
  const ExpectedStatistics st = expected_statistics(model);
  VectorXd out(rp.n);
  for (std::int64_t i = 0; i < rp.n; ++i) {
    const int g = rp.group_of[i];
    out[i] = st.group_degree_totals[g] / static_cast<double>(rp.sizes[g]);
  }
  return out;
}

SparseGraph sample_graph(const FittedModel& model, std::uint64_t seed) {
  const int groups = model.reduced->groups();
  MatrixXd p(groups, groups);
  for (int g = 0; g < groups; ++g)
    for (int h = g; h < groups; ++h) p(g, h) = p(h, g) = sigmoid(model.group_logit(g, h));
  return sample_grouped(model.num_nodes(), model.reduced->members(), [&p](int g, int h) { return p(g, h); },
                        seed, model.labels);
}

double log_likelihood(const FittedModel& model, const SparseGraph& g) {
  const ReducedProblem& rp = *model.reduced;
  if (g.num_nodes() != rp.n) throw Error("graph and model have different node counts");
  double ll = 0.0;
  for (const Edge& e : g.edges()) ll += edge_logit(model, e.u, e.v);
  for (int a = 0; a < rp.groups(); ++a)
    for (int b = a; b < rp.groups(); ++b) {
      const double w = pair_weight(rp, a, b);
      if (w > 0.0) ll -= w * softplus(model.group_logit(a, b));
    }
  return ll;
}

}  // namespace maxent
