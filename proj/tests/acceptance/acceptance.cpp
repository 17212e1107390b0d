// Acceptance checks. `acceptance <N>` runs one criterion, `acceptance` runs
// all of them. Each prints one line: "criterion N PASS|FAIL|BLOCKED name: details".
// Exit status: 0 pass, 1 fail, 77 blocked (a required dataset is missing).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "maxent/eval.hpp"
#include "maxent/features.hpp"
#include "maxent/graph.hpp"
#include "maxent/model.hpp"
#include "maxent/pipeline.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace maxent;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

enum class Status { Pass, Fail, Blocked };

struct Outcome {
  Status status = Status::Fail;
  std::string details;
};

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome verdict(bool ok, std::string details) { return {ok ? Status::Pass : Status::Fail, std::move(details)}; }

std::string data_dir() {
  if (const char* env = std::getenv("MAXENT_DATA_DIR"); env && *env) return env;
  return MAXENT_TEST_DATA_DIR;
}

// Missing datasets block a criterion; they are never downloaded here.
bool have_dataset(const std::string& name, std::string& path) {
  path = data_dir() + "/" + name;
  return std::filesystem::exists(path);
}

SparseGraph connected_dataset(const std::string& path) {
  SparseGraph g = read_edge_list(path);
  return is_connected(g) ? g : largest_component(g);
}

OptimizerOpts tolerance(double tol, Method m = Method::LBFGS) {
  OptimizerOpts o;
  o.method = m;
  o.grad_tol = tol;
  o.max_iters = 20000;
  return o;
}

// ---------------------------------------------------------------------------

// True when no free multiplier sits at the cap. Targets on the boundary of
// the reachable set have no finite optimum; the capped model then cannot
// match them and only normalization is checked.
bool interior_optimum(const FittedModel& m, const SparseGraph& g) {
  const auto p = oracle::node_params(m);
  for (Eigen::Index i = 0; i < p.theta.size(); ++i) {
    const auto d = g.degree(i);
    if (d > 0 && d < g.num_nodes() - 1 && std::abs(p.theta[i]) >= 40.0 - 1e-9) return false;
  }
  return (p.gamma.array().abs() < 40.0 - 1e-9).all();
}

Outcome normalization_oracle() {
  Stopwatch clock;
  std::mt19937_64 rng(2024);
  double worst_z = 0.0, worst_stat = 0.0;
  int unconverged = 0, interior = 0, boundary = 0;
  while (interior < 50) {
    const int n = std::uniform_int_distribution<int>(2, 5)(rng);
    const auto g = testing_support::random_graph(n, std::uniform_real_distribution<double>(0.2, 0.8)(rng), rng(),
                                                 false);
    const int features = std::uniform_int_distribution<int>(0, 2)(rng);
    std::vector<FeaturePtr> fs;
    for (int l = 0; l < features; ++l)
      fs.push_back(oracle::random_block_feature(n, std::uniform_int_distribution<int>(1, n)(rng), rng));
    const bool degrees = features == 0 || std::bernoulli_distribution(0.7)(rng);
    const auto m = fit(g, make_model_spec(g, degrees, fs), tolerance(1e-7));
    if (!m.converged) ++unconverged;
    const auto& rp = *m.reduced;

    double z = 0.0;
    VectorXd deg = VectorXd::Zero(n);
    VectorXd tot = VectorXd::Zero(static_cast<Eigen::Index>(fs.size()));
    oracle::for_each_graph(n, [&](const SparseGraph& h) {
      const double p = std::exp(log_likelihood(m, h));
      z += p;
      for (NodeId i = 0; i < n; ++i) deg[i] += p * static_cast<double>(h.degree(i));
      for (std::size_t l = 0; l < fs.size(); ++l)
        tot[static_cast<Eigen::Index>(l)] += p * oracle::feature_total(h, *fs[l]);
    });
    worst_z = std::max(worst_z, std::abs(z - 1.0));
    if (!interior_optimum(m, g)) {
      ++boundary;
      continue;
    }
    ++interior;
    if (degrees)
      for (NodeId i = 0; i < n; ++i)
        worst_stat = std::max(worst_stat, std::abs(deg[i] - static_cast<double>(g.degree(i))));
    for (std::size_t l = 0; l < fs.size(); ++l)
      worst_stat = std::max(worst_stat, std::abs(tot[static_cast<Eigen::Index>(l)] - rp.global_targets[l]));
  }
  const double secs = clock.seconds();
  return verdict(worst_z <= 1e-9 && worst_stat <= 1e-6 && unconverged == 0 && secs < 60,
                 fmt("%d specs with a finite optimum (+%d boundary specs, normalization only), max |Z-1| = %.2e, "
                     "max |E[stat]-target| = %.2e, unconverged %d, %.1f s",
                     interior, boundary, worst_z, worst_stat, unconverged, secs));
}

Outcome gradient_check() {
  Stopwatch clock;
  std::mt19937_64 rng(7);
  const double h = 1e-6;
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const int n = std::uniform_int_distribution<int>(6, 40)(rng);
    const auto g = testing_support::random_graph(n, std::uniform_real_distribution<double>(0.1, 0.4)(rng), rng());
    std::vector<FeaturePtr> fs;
    const int features = std::uniform_int_distribution<int>(0, 2)(rng);
    for (int l = 0; l < features; ++l)
      fs.push_back(oracle::random_block_feature(n, std::uniform_int_distribution<int>(1, 5)(rng), rng));
    const bool degrees = features == 0 || std::bernoulli_distribution(0.7)(rng);
    const auto rp = build_reduced(g, make_model_spec(g, degrees, fs));
    std::normal_distribution<double> nd;
    VectorXd x(rp.num_params());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = nd(rng);
    VectorXd grad(x.size()), scratch(x.size());
    dual_value_grad(rp, x, grad);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      VectorXd xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd = (dual_value_grad(rp, xp, scratch) - dual_value_grad(rp, xm, scratch)) / (2 * h);
      // Relative to the component, with unit floor for components near zero.
      worst = std::max(worst, std::abs(fd - grad[i]) / std::max(1.0, std::abs(grad[i])));
    }
  }
  return verdict(worst < 1e-5, fmt("20 instances, max relative error %.2e, %.2f s", worst, clock.seconds()));
}

Outcome reduced_equals_full() {
  Stopwatch clock;
  std::mt19937_64 rng(11);
  double worst = 0.0;
  int unconverged = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const int n = std::uniform_int_distribution<int>(8, 60)(rng);
    const auto g = testing_support::random_graph(n, std::uniform_real_distribution<double>(0.05, 0.3)(rng), rng());
    std::vector<FeaturePtr> fs;
    const int features = std::uniform_int_distribution<int>(1, 2)(rng);
    for (int l = 0; l < features; ++l)
      fs.push_back(oracle::random_block_feature(n, std::uniform_int_distribution<int>(1, 5)(rng), rng));
    const auto spec = make_model_spec(g, true, fs);
    // Duals here reach ~1e3, where gradients much below 1e-6 are under the
    // objective's rounding floor.
    const auto red = fit(g, spec, tolerance(1e-5), Grouping::Reduced);
    const auto full = fit(g, spec, tolerance(1e-5), Grouping::PerNode);
    unconverged += !red.converged + !full.converged;
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = i + 1; j < n; ++j)
        worst = std::max(worst, std::abs(edge_probability(red, i, j) - edge_probability(full, i, j)));
  }
  const double secs = clock.seconds();
  return verdict(worst <= 1e-5 && unconverged == 0 && secs < 120,
                 fmt("20 graphs, max |p_reduced - p_per_node| = %.2e, unconverged %d, %.1f s", worst, unconverged,
                     secs));
}

Outcome lemma_bound() {
  Stopwatch clock;
  std::mt19937_64 rng(13);
  int violations = 0;
  double tightest = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = std::uniform_int_distribution<int>(20, 400)(rng);
    // Isolated nodes are attached: graphs read from edge lists have none, and a
    // degree-0 node adds a unique degree to its bin without adding to nnz.
    const auto g = testing_support::random_graph(n, std::uniform_real_distribution<double>(0.005, 0.08)(rng), rng());
    const int k = std::uniform_int_distribution<int>(1, 20)(rng);
    const auto f = oracle::random_block_feature(n, std::min(k, n), rng);
    const auto rp = build_reduced(g, make_model_spec(g, true, {f}));
    // Sum over bins of the distinct degrees present in the bin.
    std::vector<std::set<std::int64_t>> per_bin(static_cast<std::size_t>(f->bins()));
    for (NodeId i = 0; i < n; ++i) per_bin[static_cast<std::size_t>(f->bin_of(i))].insert(g.degree(i));
    std::int64_t unique = 0;
    for (const auto& s : per_bin) unique += static_cast<std::int64_t>(s.size());
    const double nnz = 2.0 * static_cast<double>(g.num_edges());
    const double bound = std::sqrt(2.0 * f->bins() * nnz);
    if (static_cast<double>(unique) > bound || unique != rp.unique_degrees) ++violations;
    tightest = std::max(tightest, static_cast<double>(unique) / std::max(bound, 1e-300));
  }
  return verdict(violations == 0, fmt("100 graphs, %d violations, max ratio to bound %.3f, %.2f s", violations,
                                      tightest, clock.seconds()));
}

Outcome karate() {
  Stopwatch clock;
  std::string path;
  if (!have_dataset("karate.edges", path)) return {Status::Blocked, "karate.edges missing"};
  const auto g = read_edge_list(path);
  const auto base = fit(g, make_model_spec(g, true, {}), tolerance(1e-6));
  const VectorXd ed = expected_degrees(base);
  double worst = 0.0;
  for (NodeId i = 0; i < g.num_nodes(); ++i) worst = std::max(worst, std::abs(ed[i] - static_cast<double>(g.degree(i))));
  const auto pa = std::make_shared<const BlockFeature>(degree_block_feature(g));
  const auto with_pa = fit(g, make_model_spec(g, true, {pa}));
  // The file's labels 0 and 33 are the two teachers.
  const NodeId a = g.index_of(0).value(), b = g.index_of(33).value();
  const double p0 = edge_probability(base, a, b), p1 = edge_probability(with_pa, a, b);
  const double secs = clock.seconds();
  return verdict(base.converged && with_pa.converged && worst < 1e-3 && p1 < p0 && secs < 10,
                 fmt("max |E[d]-d| = %.2e, P(0,33) degrees %.4f -> with PA %.4f, %.2f s", worst, p0, p1, secs));
}

Outcome link_prediction_reference() {
  std::string ppi, wiki;
  const bool has_ppi = have_dataset("ppi.edges", ppi), has_wiki = have_dataset("wikipedia.edges", wiki);
  if (!has_ppi || !has_wiki)
    return {Status::Blocked, std::string("dataset missing: ") + (has_ppi ? "" : "ppi.edges ") +
                                 (has_wiki ? "" : "wikipedia.edges ") + "(see scripts/fetch_datasets.sh)"};
  Stopwatch clock;
  struct Row {
    std::string method;
    double expected;
  };
  struct Dataset {
    std::string path;
    std::vector<Row> rows;
  };
  const std::vector<Dataset> sets{
      {ppi, {{"MaxEnt(full)", 0.9097}, {"MaxEnt(k=5)", 0.9018}, {"PA", 0.9022}}},
      {wiki, {{"MaxEnt(full)", 0.9182}, {"MaxEnt(k=5)", 0.9179}}},
  };
  const std::vector<LpMethod> methods{LpMethod::maxent("MaxEnt(full)", maxent_full_config()),
                                      LpMethod::maxent("MaxEnt(k=5)", maxent_blocked_config(128, 5)),
                                      LpMethod::heuristic(Heuristic::PA)};
  bool ok = true;
  std::ostringstream det;
  for (const Dataset& ds : sets) {
    const auto g = connected_dataset(ds.path);
    std::vector<double> sum(methods.size(), 0.0);
    for (std::uint64_t r = 0; r < 3; ++r) {
      const auto res = lp_pipeline(g, methods, 0.5, r);
      for (std::size_t i = 0; i < res.size(); ++i) sum[i] += res[i].auc / 3.0;
    }
    det << std::filesystem::path(ds.path).stem().string() << ":";
    for (const Row& row : ds.rows) {
      const auto it = std::find_if(methods.begin(), methods.end(), [&](const LpMethod& m) { return m.name == row.method; });
      const double got = sum[static_cast<std::size_t>(it - methods.begin())];
      ok = ok && std::abs(got - row.expected) <= 0.02;
      det << ' ' << row.method << ' ' << fmt("%.4f (ref %.4f)", got, row.expected);
    }
    det << "; ";
  }
  const double secs = clock.seconds();
  det << fmt("%.0f s", secs);
  return verdict(ok && secs < 1800, det.str());
}

Outcome gof_facebook() {
  std::string path;
  if (!have_dataset("facebook.edges", path))
    return {Status::Blocked, "dataset missing: facebook.edges (see scripts/fetch_datasets.sh)"};
  Stopwatch clock;
  const auto g = read_edge_list(path);
  MaxEntConfig cfg;
  FeatureSpec poly = FeatureSpec::of(FeatureKind::POLY);
  poly.coeffs = {1.0, 0.025};
  cfg.features = {poly};
  cfg.d = 20;
  cfg.k = 100;
  const auto fitted = fit_pipeline(g, cfg).model;
  const MaxEntEdgeModel model(fitted);
  const auto reports = gof_run(model, g, 50, 0);
  const double esp = reports[2].coverage(), triad = reports[1].coverage();

  const ChungLu cl(g);
  const auto cl_reports = gof_run(cl, g, 50, 0);
  const auto& cl_esp = cl_reports[2];
  // High shared-partner counts: the upper half of the observed categories.
  const std::int64_t top = cl_esp.observed.empty() ? 0 : cl_esp.observed.rbegin()->first;
  int outside = 0;
  for (const auto& [c, low] : cl_esp.band_low) {
    if (c < top / 2) continue;
    const auto it = cl_esp.observed.find(c);
    const double obs = it == cl_esp.observed.end() ? 0.0 : it->second;
    if (obs < low - 1e-12 || obs > cl_esp.band_high.at(c) + 1e-12) ++outside;
  }
  const double secs = clock.seconds();
  return verdict(esp >= 0.9 && triad >= 0.9 && outside >= 1 && secs < 1200,
                 fmt("poly model coverage ESP %.3f triad %.3f; Chung-Lu ESP high categories outside %d; %.0f s", esp,
                     triad, outside, secs));
}

Outcome scaling() {
  Stopwatch clock;
  MaxEntConfig cfg;
  cfg.features = {FeatureSpec::of(FeatureKind::CN)};
  cfg.d = 20;
  cfg.k = 100;
  std::vector<double> times;
  std::ostringstream det;
  for (std::int64_t n : {1000, 10000, 100000}) {
    const auto g = erdos_renyi(n, 20.0 / static_cast<double>(n - 1), 1);
    Stopwatch t;
    const auto res = fit_pipeline(g, cfg);
    times.push_back(t.seconds());
    det << fmt("n=%lld m=%lld %.1fs (eig %.1f, k-means %.1f, opt %.1f); ", static_cast<long long>(n),
               static_cast<long long>(g.num_edges()), times.back(), res.times.eig, res.times.kmeans, res.times.opt);
  }
  const double ratio = times[2] / times[1];

  // Bin sweep at n = 1e5 over one CN factor.
  const auto g = erdos_renyi(100000, 20.0 / 99999.0, 2);
  const auto factor = lowrank_feature(g, FeatureSpec::of(FeatureKind::CN), 20);
  std::vector<double> groups;
  for (int k = 200; k <= 2000; k += 200) {
    auto bf = std::make_shared<const BlockFeature>(
        block_feature(factor, FeatureSpec::of(FeatureKind::CN), k, KMeansOptions{1, 10}, 3));
    groups.push_back(static_cast<double>(build_reduced(g, make_model_spec(g, true, {bf})).groups()));
  }
  bool increasing = true, concave = true;
  for (std::size_t i = 1; i < groups.size(); ++i) increasing = increasing && groups[i] > groups[i - 1];
  for (std::size_t i = 2; i < groups.size(); ++i)
    concave = concave && groups[i] - groups[i - 1] <= groups[i - 1] - groups[i - 2];
  // Log-log slope of groups against k: 1/2 for a sqrt(k) law.
  const double slope = std::log(groups.back() / groups.front()) / std::log(10.0);
  det << fmt("ratio t(1e5)/t(1e4) = %.1f; groups k=200..2000: ", ratio);
  for (double v : groups) det << static_cast<long long>(v) << ' ';
  const double secs = clock.seconds();
  det << fmt("(log-log slope %.2f, increasing %s, concave %s); %.0f s", slope, increasing ? "yes" : "no",
             concave ? "yes" : "no", secs);
  return verdict(ratio < 25 && increasing && concave && secs < 1800, det.str());
}

MatrixXd dense_adjacency(const SparseGraph& g) { return MatrixXd(g.adjacency()); }

Outcome exact_vs_dense() {
  Stopwatch clock;
  std::mt19937_64 rng(19);
  double worst_recon = 0.0, worst_order = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = std::uniform_int_distribution<int>(8, 50)(rng);
    const auto g = testing_support::random_graph(n, std::uniform_real_distribution<double>(0.1, 0.4)(rng), rng());
    FeatureSpec poly = FeatureSpec::of(FeatureKind::POLY);
    poly.coeffs = {1.0, 0.025};
    for (const FeatureSpec& spec : {FeatureSpec::of(FeatureKind::CN), FeatureSpec::of(FeatureKind::RAI),
                                    FeatureSpec::of(FeatureKind::AA), poly}) {
      const auto f = lowrank_feature(g, spec, n);
      worst_recon = std::max(worst_recon, (f.implied() - exact_feature(g, spec)).norm());
    }
    // Truncated polynomial features keep the d largest |poly(alpha)|.
    const MatrixXd a = dense_adjacency(g);
    for (const std::vector<double>& coeffs : {std::vector<double>{1.0}, std::vector<double>{0.0, 1.0},
                                              std::vector<double>{1.0, 0.025}, std::vector<double>{0.5, 0.2, 0.1}}) {
      FeatureSpec s = FeatureSpec::of(FeatureKind::POLY);
      s.coeffs = coeffs;
      MatrixXd dense = MatrixXd::Zero(n, n), power = MatrixXd::Identity(n, n);
      for (double q : coeffs) {
        power = power * a;
        dense += q * power;
      }
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(dense);
      std::vector<double> ref(es.eigenvalues().data(), es.eigenvalues().data() + n);
      std::sort(ref.begin(), ref.end(), [](double x, double y) { return std::abs(x) > std::abs(y); });
      const int d = std::max(1, n / 4);
      const auto f = lowrank_feature(g, s, d);
      std::vector<double> got;
      for (Eigen::Index c = 0; c < f.rank(); ++c) got.push_back(f.signs[c] * f.factor.col(c).squaredNorm());
      std::sort(got.begin(), got.end(), [](double x, double y) { return std::abs(x) > std::abs(y); });
      if (static_cast<int>(got.size()) != d) worst_order = std::max(worst_order, 1.0);
      for (int i = 0; i < std::min<int>(d, static_cast<int>(got.size())); ++i)
        worst_order = std::max(worst_order, std::abs(std::abs(got[i]) - std::abs(ref[i])));
    }
  }
  return verdict(worst_recon <= 1e-6 && worst_order <= 1e-8,
                 fmt("10 graphs, max Frobenius error at d=n %.2e, max top-d magnitude error %.2e, %.2f s", worst_recon,
                     worst_order, clock.seconds()));
}

Outcome optimizer_agreement() {
  Stopwatch clock;
  std::string path;
  if (!have_dataset("karate.edges", path)) return {Status::Blocked, "karate.edges missing"};
  const auto g = read_edge_list(path);
  const auto rp = std::make_shared<const ReducedProblem>(build_reduced(g, make_model_spec(g, true, {})));
  std::vector<double> values;
  double worst_grad = 0.0;
  bool converged = true;
  std::ostringstream det;
  for (Method m : {Method::LBFGS, Method::NEWTON, Method::DIAG_QN}) {
    // 1e-4 puts the dual within ~1e-8 of its optimum; DIAG_QN's floor on this
    // problem is near 1e-5.
    const auto fm = fit(rp, tolerance(1e-4, m));
    converged = converged && fm.converged;
    values.push_back(fm.dual_value);
    worst_grad = std::max(worst_grad, fm.grad_norm);
    det << fmt("%s %.10f (|g| %.1e, %d it%s); ", to_string(m).c_str(), fm.dual_value, fm.grad_norm, fm.iterations,
               fm.converged ? "" : (", " + fm.message).c_str());
  }
  const double spread = *std::max_element(values.begin(), values.end()) - *std::min_element(values.begin(), values.end());
  det << fmt("spread %.2e, %.2f s", spread, clock.seconds());
  return verdict(converged && spread <= 1e-6 && worst_grad < 1e-3, det.str());
}

const char* label(Status s) {
  switch (s) {
    case Status::Pass: return "PASS";
    case Status::Fail: return "FAIL";
    case Status::Blocked: return "BLOCKED";
  }
  return "?";
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "normalization oracle", normalization_oracle},
      {2, "gradient correctness", gradient_check},
      {3, "reduced equals per-node model", reduced_equals_full},
      {4, "unique-degree bound", lemma_bound},
      {5, "Karate degrees and teachers", karate},
      {6, "link prediction on PPI and Wikipedia", link_prediction_reference},
      {7, "goodness of fit on Facebook", gof_facebook},
      {8, "scaling on Erdos-Renyi graphs", scaling},
      {9, "low-rank features against dense", exact_vs_dense},
      {10, "optimizer agreement on Karate", optimizer_agreement},
  };
  std::vector<Criterion> chosen;
  if (argc < 2) {
    chosen = all;
  } else {
    const int id = std::atoi(argv[1]);
    for (const Criterion& c : all)
      if (c.id == id) chosen.push_back(c);
    if (chosen.empty()) {
      std::cerr << "unknown criterion '" << argv[1] << "'\n";
      return 2;
    }
  }
  bool failed = false, blocked = false;
  for (const Criterion& c : chosen) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Status::Fail, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << c.id << ' ' << label(o.status) << ' ' << c.name << ": " << o.details << std::endl;
    failed = failed || o.status == Status::Fail;
    blocked = blocked || o.status == Status::Blocked;
  }
  if (failed) return 1;
  return blocked && chosen.size() == 1 ? 77 : 0;
}
