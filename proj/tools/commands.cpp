#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "maxent/eval.hpp"
#include "maxent/features.hpp"
#include "maxent/graph.hpp"
#include "maxent/model.hpp"
#include "maxent/model_io.hpp"
#include "maxent/optimizer.hpp"
#include "maxent/pipeline.hpp"

namespace maxent::cli {

namespace {

// Raised for invalid flag combinations detected after parsing.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::string input;
  std::string output;
  std::string model;
  std::string pairs;
  std::vector<std::string> features;
  std::string coeffs;
  int d = 128;
  int k = 5;
  bool no_degrees = false;
  bool exact = false;
  std::string optimizer = "lbfgs";
  double grad_tol = 1e-3;
  int max_iters = 2000;
  std::uint64_t seed = 0;
  int repeats = 3;
  double test_fraction = 0.5;
  int samples = 50;
  int threads = 0;
  std::string methods;
  std::string sizes = "1000,5000,25000";
  std::string bench_optimizers = "lbfgs,newton,diag";
  int bench_d = 20;
  int bench_k = 100;
  bool sweep = false;
  std::int64_t sweep_n = 100000;
  double memory_gb = 8.0;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_coeffs(const std::string& s) {
  std::vector<double> out;
  for (const std::string& item : split_list(s)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ConfigError("--coeffs: '" + item + "' is not a number");
    out.push_back(v);
  }
  return out;
}

MaxEntConfig model_config(const RunConfig& rc) {
  MaxEntConfig cfg;
  cfg.use_degrees = !rc.no_degrees;
  cfg.exact = rc.exact;
  cfg.d = rc.d;
  cfg.k = rc.k;
  cfg.seed = rc.seed;
  cfg.opt.method = parse_method(rc.optimizer);
  cfg.opt.grad_tol = rc.grad_tol;
  cfg.opt.max_iters = rc.max_iters;
  const std::vector<double> coeffs = parse_coeffs(rc.coeffs);
  for (const std::string& name : rc.features) {
    FeatureSpec spec = FeatureSpec::of(parse_feature_kind(name));
    if (spec.kind == FeatureKind::POLY) {
      if (coeffs.empty()) throw ConfigError("--feature poly needs --coeffs");
      spec.coeffs = coeffs;
    }
    cfg.features.push_back(std::move(spec));
  }
  cfg.validate();
  return cfg;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << std::setprecision(12);
  return out;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceEntry>& trace) {
  out << "iter,value,grad_norm,seconds\n";
  for (const TraceEntry& t : trace) out << t.iter << ',' << t.value << ',' << t.grad_norm << ',' << t.seconds << '\n';
}

void report_fit(const FittedModel& model, const PhaseTimes& times) {
  const ReducedProblem& rp = *model.reduced;
  std::cout << "groups: " << rp.groups() << "\n"
            << "glb bins: " << rp.glb.bin_count << "\n"
            << "lemma bound: " << rp.lemma_bound() << "\n"
            << "iterations: " << model.iterations << "\n"
            << "grad norm: " << model.grad_norm << "\n"
            << "converged: " << (model.converged ? "yes" : "no") << "\n"
            << "time eigendecomposition: " << times.eig << " s\n"
            << "time k-means: " << times.kmeans << " s\n"
            << "time optimization: " << times.opt << " s\n";
  for (const std::string& w : model.warnings) std::cerr << "warning: " << w << "\n";
  if (!model.converged) std::cerr << "warning: not converged: " << model.message << "\n";
}

int cmd_fit(const RunConfig& rc) {
  if (rc.output.empty()) throw ConfigError("fit needs --output");
  const SparseGraph g = read_edge_list(rc.input);
  const PipelineResult res = fit_pipeline(g, model_config(rc));
  save_model(res.model, rc.output);
  report_fit(res.model, res.times);
  return res.model.converged ? kOk : kNotConverged;
}

int cmd_predict(const RunConfig& rc) {
  const FittedModel model = load_model(rc.model);
  std::unordered_map<std::int64_t, NodeId> index;
  for (std::size_t i = 0; i < model.labels.size(); ++i) index.emplace(model.labels[i], static_cast<NodeId>(i));

  std::ifstream in(rc.pairs);
  if (!in) throw ConfigError("cannot open pairs file '" + rc.pairs + "'");
  std::ofstream file;
  if (!rc.output.empty()) file = open_output(rc.output);
  std::ostream& out = rc.output.empty() ? std::cout : file;
  out << std::setprecision(12) << "src,dst,probability\n";

  bool bad = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string su, sv;
    if (!(ls >> su >> sv)) {
      out << line << ",,error:malformed\n";
      bad = true;
      continue;
    }
    out << su << ',' << sv << ',';
    std::int64_t u = 0, v = 0;
    try {
      u = std::stoll(su);
      v = std::stoll(sv);
    } catch (const std::exception&) {
      out << "error:malformed\n";
      bad = true;
      continue;
    }
    const auto iu = index.find(u), iv = index.find(v);
    if (iu == index.end() || iv == index.end()) {
      out << "error:unknown-node\n";
      bad = true;
    } else if (iu->second == iv->second) {
      out << "error:self-pair\n";
      bad = true;
    } else {
      out << edge_probability(model, iu->second, iv->second) << '\n';
    }
  }
  return bad ? kPrecondition : kOk;
}

int cmd_sample(const RunConfig& rc) {
  if (rc.output.empty()) throw ConfigError("sample needs --output (file prefix)");
  if (rc.samples < 1) throw ConfigError("--samples must be positive");
  const FittedModel model = load_model(rc.model);
  for (int s = 0; s < rc.samples; ++s) {
    const std::string path = rc.output + "_" + std::to_string(s) + ".edges";
    std::ofstream out = open_output(path);
    write_edge_list(out, sample_graph(model, rc.seed + static_cast<std::uint64_t>(s)));
  }
  std::cout << "wrote " << rc.samples << " graph(s) with prefix " << rc.output << "\n";
  return kOk;
}

std::vector<LpMethod> lp_methods(const RunConfig& rc) {
  std::vector<std::string> names = split_list(rc.methods);
  if (names.empty()) names = {"CN", "JC", "AA", "PA", "RAI", "full", "blocked"};
  std::vector<LpMethod> out;
  for (const std::string& name : names) {
    if (name == "full") {
      MaxEntConfig cfg = maxent_full_config();
      cfg.opt.grad_tol = rc.grad_tol;
      cfg.opt.method = parse_method(rc.optimizer);
      out.push_back(LpMethod::maxent("MaxEnt(full)", cfg));
    } else if (name == "blocked") {
      MaxEntConfig cfg = maxent_blocked_config(rc.d, rc.k);
      cfg.opt.grad_tol = rc.grad_tol;
      cfg.opt.method = parse_method(rc.optimizer);
      out.push_back(LpMethod::maxent("MaxEnt(k=" + std::to_string(rc.k) + ")", cfg));
    } else if (name == "custom") {
      out.push_back(LpMethod::maxent("MaxEnt(custom)", model_config(rc)));
    } else {
      out.push_back(LpMethod::heuristic(parse_heuristic(name)));
    }
  }
  return out;
}

int cmd_linkpred(const RunConfig& rc) {
  if (rc.repeats < 1) throw ConfigError("--repeats must be positive");
  const SparseGraph g = read_edge_list(rc.input);
  if (!is_connected(g))
    throw DisconnectedGraphError(
        "input graph is disconnected; restrict it to its largest connected component first");
  const std::vector<LpMethod> methods = lp_methods(rc);

  std::vector<LpResult> all;
  for (int r = 0; r < rc.repeats; ++r) {
    const auto res = lp_pipeline(g, methods, rc.test_fraction, rc.seed + static_cast<std::uint64_t>(r));
    for (const LpResult& x : res) {
      std::cout << "repeat " << r << "  " << std::left << std::setw(14) << x.method << " AUC " << std::fixed
                << std::setprecision(4) << x.auc << "  (" << x.seconds << " s)\n"
                << std::defaultfloat;
      all.push_back(x);
    }
  }
  std::cout << "mean AUC over " << rc.repeats << " repeat(s):\n";
  for (const LpMethod& m : methods) {
    double sum = 0.0;
    for (const LpResult& x : all)
      if (x.method == m.name) sum += x.auc;
    std::cout << "  " << std::left << std::setw(14) << m.name << std::fixed << std::setprecision(4)
              << sum / rc.repeats << "\n"
              << std::defaultfloat;
  }
  if (!rc.output.empty()) {
    std::ofstream out = open_output(rc.output);
    write_lp_csv(out, all);
  }
  return kOk;
}

int cmd_gof(const RunConfig& rc) {
  if (rc.output.empty()) throw ConfigError("gof needs --output (file prefix)");
  const SparseGraph g = read_edge_list(rc.input);
  int status = kOk;

  const ChungLu cl(g);
  const auto cl_reports = gof_run(cl, g, rc.samples, rc.seed);
  {
    std::ofstream out = open_output(rc.output + "_chung_lu.csv");
    write_gof_csv(out, cl_reports);
  }
  for (const auto& rep : cl_reports)
    std::cout << "chung-lu " << to_string(rep.statistic) << " coverage " << rep.coverage() << "\n";

  if (!rc.features.empty() || !rc.no_degrees) {
    const PipelineResult res = fit_pipeline(g, model_config(rc));
    report_fit(res.model, res.times);
    if (!res.model.converged) status = kNotConverged;
    const MaxEntEdgeModel me(res.model);
    const auto reports = gof_run(me, g, rc.samples, rc.seed);
    std::ofstream out = open_output(rc.output + "_maxent.csv");
    write_gof_csv(out, reports);
    for (const auto& rep : reports)
      std::cout << "maxent " << to_string(rep.statistic) << " coverage " << rep.coverage() << "\n";
  }
  return status;
}

// G(n, p) with m ~ 10n edges: p = 20 / (n - 1).
SparseGraph bench_graph(std::int64_t n, std::uint64_t seed) {
  return erdos_renyi(n, std::min(1.0, 20.0 / static_cast<double>(n - 1)), seed);
}

int cmd_bench(const RunConfig& rc) {
  if (rc.output.empty()) throw ConfigError("bench needs --output (file prefix)");
  std::vector<std::int64_t> sizes;
  for (const std::string& s : split_list(rc.sizes)) sizes.push_back(std::stoll(s));
  std::vector<Method> methods;
  for (const std::string& s : split_list(rc.bench_optimizers)) methods.push_back(parse_method(s));
  const double memory_limit = rc.memory_gb * 1e9;

  std::ofstream timing = open_output(rc.output + "_timing.csv");
  timing << "n,edges,optimizer,groups,eig_seconds,kmeans_seconds,opt_seconds,total_seconds,iterations,grad_norm,"
            "converged\n";
  MaxEntConfig cfg;
  cfg.features = {FeatureSpec::of(FeatureKind::CN)};
  cfg.d = rc.bench_d;
  cfg.k = rc.bench_k;
  cfg.seed = rc.seed;
  cfg.opt.grad_tol = rc.grad_tol;
  cfg.opt.max_iters = rc.max_iters;

  for (std::int64_t n : sizes) {
    if (n < 2) throw ConfigError("bench sizes must be at least 2");
    const SparseGraph g = bench_graph(n, rc.seed);
    PhaseTimes times;
    const auto features = build_features(g, cfg, &times);
    auto rp = std::make_shared<const ReducedProblem>(build_reduced(g, make_model_spec(g, true, features)));
    std::cout << "n=" << n << " edges=" << g.num_edges() << " groups=" << rp->groups() << " eig=" << times.eig
              << "s kmeans=" << times.kmeans << "s\n";
    for (Method m : methods) {
      const double p = rp->num_params();
      if (m == Method::NEWTON && 3.0 * p * p * 8.0 > memory_limit) {
        std::cerr << "memory guard: skipping Newton at n=" << n << " (" << rp->num_params() << " parameters)\n";
        continue;
      }
      OptimizerOpts opt = cfg.opt;
      opt.method = m;
      const auto start = std::chrono::steady_clock::now();
      const FittedModel model = fit(rp, opt);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      timing << n << ',' << g.num_edges() << ',' << to_string(m) << ',' << rp->groups() << ',' << times.eig << ','
             << times.kmeans << ',' << secs << ',' << times.eig + times.kmeans + secs << ',' << model.iterations
             << ',' << model.grad_norm << ',' << (model.converged ? 1 : 0) << '\n';
      timing.flush();
      std::ofstream trace = open_output(rc.output + "_trace_" + to_string(m) + "_" + std::to_string(n) + ".csv");
      write_trace_csv(trace, model.trace);
      std::cout << "  " << to_string(m) << ": " << secs << " s, " << model.iterations << " iterations, grad norm "
                << model.grad_norm << "\n";
    }
  }

  if (rc.sweep) {
    if (rc.sweep_n < 2) throw ConfigError("--sweep-n must be at least 2");
    std::ofstream sweep = open_output(rc.output + "_sweep.csv");
    sweep << "k,groups,lemma_bound,seconds\n";
    const SparseGraph g = bench_graph(rc.sweep_n, rc.seed);
    EigOptions eig;
    eig.seed = rc.seed;
    const LowRankFactor factor = lowrank_feature(g, FeatureSpec::of(FeatureKind::CN), rc.bench_d, eig);
    for (int k = 200; k <= 2000; k += 200) {
      const auto start = std::chrono::steady_clock::now();
      auto bf = std::make_shared<const BlockFeature>(
          block_feature(factor, FeatureSpec::of(FeatureKind::CN), k, KMeansOptions{1, 10}, rc.seed));
      const ReducedProblem rp = build_reduced(g, make_model_spec(g, true, {bf}));
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      sweep << k << ',' << rp.groups() << ',' << rp.lemma_bound() << ',' << secs << '\n';
      sweep.flush();
      std::cout << "sweep k=" << k << " groups=" << rp.groups() << "\n";
    }
  }
  return kOk;
}

void add_model_flags(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--feature", rc.features, "Global feature: cn, aa, rai, pa or poly (repeatable)")
      ->check(CLI::IsMember({"cn", "aa", "rai", "pa", "poly"}));
  sub->add_option("--coeffs", rc.coeffs, "Comma separated polynomial coefficients q1,q2,... for poly");
  sub->add_option("--d", rc.d, "Rank of the low-rank feature factors");
  sub->add_option("--k", rc.k, "Number of bins per feature");
  sub->add_flag("--no-degrees", rc.no_degrees, "Drop the per-node degree constraints");
  sub->add_flag("--exact", rc.exact, "Use exact features (one node per bin)");
  sub->add_option("--optimizer", rc.optimizer, "lbfgs, newton or diag");
  sub->add_option("--grad-tol", rc.grad_tol, "Gradient norm tolerance");
  sub->add_option("--max-iters", rc.max_iters, "Optimizer iteration cap");
}

}  // namespace

int run(int argc, char** argv) {
  RunConfig rc;
  if (const char* env = std::getenv("MAXENT_THREADS")) rc.threads = std::atoi(env);

  CLI::App app{"Block-approximated maximum-entropy graph models"};
  app.require_subcommand(1);
  app.add_option("--threads", rc.threads, "Worker thread cap (default: $MAXENT_THREADS)");
  app.add_option("--seed", rc.seed, "Random seed");

  auto* fit_cmd = app.add_subcommand("fit", "Fit a model and write it as JSON");
  fit_cmd->add_option("--input", rc.input, "Edge list")->required();
  fit_cmd->add_option("--output", rc.output, "Model file")->required();
  add_model_flags(fit_cmd, rc);

  auto* predict_cmd = app.add_subcommand("predict", "Edge probabilities for node pairs");
  predict_cmd->add_option("--model", rc.model, "Model file")->required();
  predict_cmd->add_option("--pairs,--input", rc.pairs, "File with one 'src dst' pair per line")->required();
  predict_cmd->add_option("--output", rc.output, "CSV output (default: stdout)");

  auto* sample_cmd = app.add_subcommand("sample", "Draw graphs from a fitted model");
  sample_cmd->add_option("--model", rc.model, "Model file")->required();
  sample_cmd->add_option("--samples", rc.samples, "Number of graphs (default 1)");
  sample_cmd->add_option("--output", rc.output, "Output prefix; writes PREFIX_<i>.edges")->required();

  auto* lp_cmd = app.add_subcommand("linkpred", "Link prediction AUC over train/test splits");
  lp_cmd->add_option("--input", rc.input, "Edge list")->required();
  lp_cmd->add_option("--output", rc.output, "Results CSV");
  lp_cmd->add_option("--repeats", rc.repeats, "Number of random splits");
  lp_cmd->add_option("--test-fraction", rc.test_fraction, "Fraction of edges held out");
  lp_cmd->add_option("--methods", rc.methods,
                     "Comma separated: CN,JC,AA,PA,RAI,full,blocked,custom (default: all but custom)");
  add_model_flags(lp_cmd, rc);

  auto* gof_cmd = app.add_subcommand("gof", "Goodness-of-fit bands for Chung-Lu and a MaxEnt model");
  gof_cmd->add_option("--input", rc.input, "Edge list")->required();
  gof_cmd->add_option("--output", rc.output, "Output prefix")->required();
  gof_cmd->add_option("--samples", rc.samples, "Graphs sampled per model");
  add_model_flags(gof_cmd, rc);

  auto* bench_cmd = app.add_subcommand("bench", "Runtime scaling on Erdos-Renyi graphs");
  bench_cmd->add_option("--output", rc.output, "Output prefix")->required();
  bench_cmd->add_option("--sizes", rc.sizes, "Comma separated node counts");
  bench_cmd->add_option("--optimizer", rc.bench_optimizers, "Comma separated optimizers to compare");
  bench_cmd->add_option("--d", rc.bench_d, "Rank of the CN factor");
  bench_cmd->add_option("--k", rc.bench_k, "Number of CN bins");
  bench_cmd->add_option("--grad-tol", rc.grad_tol, "Gradient norm tolerance");
  bench_cmd->add_option("--max-iters", rc.max_iters, "Optimizer iteration cap");
  bench_cmd->add_flag("--sweep", rc.sweep, "Also run the bin sweep k = 200..2000");
  bench_cmd->add_option("--sweep-n", rc.sweep_n, "Node count of the bin sweep graph");
  bench_cmd->add_option("--memory-gb", rc.memory_gb, "Skip runs whose dense buffers would exceed this");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  if (rc.threads > 0) Eigen::setNbThreads(rc.threads);
  // Block sizes used for goodness of fit unless given explicitly.
  if (*gof_cmd && gof_cmd->get_option("--d")->count() == 0) rc.d = 20;
  if (*gof_cmd && gof_cmd->get_option("--k")->count() == 0) rc.k = 100;
  if (*sample_cmd && sample_cmd->get_option("--samples")->count() == 0) rc.samples = 1;

  try {
    if (*fit_cmd) return cmd_fit(rc);
    if (*predict_cmd) return cmd_predict(rc);
    if (*sample_cmd) return cmd_sample(rc);
    if (*lp_cmd) return cmd_linkpred(rc);
    if (*gof_cmd) return cmd_gof(rc);
    if (*bench_cmd) return cmd_bench(rc);
  } catch (const DisconnectedGraphError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPrecondition;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace maxent::cli
