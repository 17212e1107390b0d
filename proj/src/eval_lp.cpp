#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <ostream>

#include "maxent/eval.hpp"

namespace maxent {

double auc(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() || neg.empty()) throw Error("AUC needs at least one positive and one negative score");
  struct Item {
    double score;
    bool positive;
  };
  std::vector<Item> all;
  all.reserve(pos.size() + neg.size());
  for (double s : pos) all.push_back({s, true});
  for (double s : neg) all.push_back({s, false});
  for (const Item& it : all)
    if (std::isnan(it.score)) throw Error("AUC: NaN score");
  std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.score < b.score; });

  // Sum of positive ranks with ties sharing their average rank.
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    std::size_t npos = 0;
    while (j < all.size() && all[j].score == all[i].score) npos += all[j++].positive;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    rank_sum += avg_rank * static_cast<double>(npos);
    i = j;
  }
  const double p = static_cast<double>(pos.size());
  const double n = static_cast<double>(neg.size());
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

std::string to_string(Heuristic h) {
  switch (h) {
    case Heuristic::CN: return "CN";
    case Heuristic::JC: return "JC";
    case Heuristic::AA: return "AA";
    case Heuristic::PA: return "PA";
    case Heuristic::RAI: return "RAI";
  }
  return "?";
}

Heuristic parse_heuristic(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  for (Heuristic h : {Heuristic::CN, Heuristic::JC, Heuristic::AA, Heuristic::PA, Heuristic::RAI})
    if (to_string(h) == s) return h;
  throw Error("unknown heuristic '" + std::string(name) + "'");
}

double heuristic_score(const SparseGraph& g, NodeId i, NodeId j, Heuristic h) {
  if (i < 0 || j < 0 || i >= g.num_nodes() || j >= g.num_nodes()) throw Error("node id out of range");
  if (i == j) throw Error("heuristic score is undefined for a self-pair");
  const double di = static_cast<double>(g.degree(i));
  const double dj = static_cast<double>(g.degree(j));
  if (h == Heuristic::PA) return di * dj;

  auto a = g.neighbors(i);
  auto b = g.neighbors(j);
  double common = 0.0, aa = 0.0, rai = 0.0;
  for (std::size_t x = 0, y = 0; x < a.size() && y < b.size();) {
    if (a[x] < b[y]) {
      ++x;
    } else if (b[y] < a[x]) {
      ++y;
    } else {
      const double dk = static_cast<double>(g.degree(a[x]));
      common += 1.0;
      rai += 1.0 / dk;
      if (dk > 1.0) aa += 1.0 / std::log(dk);
      ++x;
      ++y;
    }
  }
  switch (h) {
    case Heuristic::CN: return common;
    case Heuristic::AA: return aa;
    case Heuristic::RAI: return rai;
    case Heuristic::JC: {
      const double uni = di + dj - common;
      return uni > 0.0 ? common / uni : 0.0;
    }
    case Heuristic::PA: break;
  }
  return di * dj;
}

LpMethod LpMethod::heuristic(Heuristic h) {
  return {to_string(h), [h](const SparseGraph& train, std::uint64_t) -> PairScorer {
            auto g = std::make_shared<const SparseGraph>(train);
            return [g, h](NodeId i, NodeId j) { return heuristic_score(*g, i, j, h); };
          }};
}

LpMethod LpMethod::maxent(std::string name, MaxEntConfig cfg) {
  return {std::move(name), [cfg](const SparseGraph& train, std::uint64_t seed) -> PairScorer {
            MaxEntConfig c = cfg;
            c.seed = seed;
            auto model = std::make_shared<const FittedModel>(fit_pipeline(train, c).model);
            // Logits order pairs exactly like probabilities without saturating.
            return [model](NodeId i, NodeId j) { return edge_logit(*model, i, j); };
          }};
}

MaxEntConfig maxent_full_config() {
  MaxEntConfig cfg;
  cfg.exact = true;
  cfg.features = {FeatureSpec::of(FeatureKind::CN), FeatureSpec::of(FeatureKind::RAI),
                  FeatureSpec::of(FeatureKind::PA)};
  return cfg;
}

MaxEntConfig maxent_blocked_config(int d, int k) {
  MaxEntConfig cfg;
  cfg.d = d;
  cfg.k = k;
  cfg.features = {FeatureSpec::of(FeatureKind::CN), FeatureSpec::of(FeatureKind::RAI),
                  FeatureSpec::of(FeatureKind::PA)};
  return cfg;
}

std::vector<LpMethod> default_lp_methods() {
  std::vector<LpMethod> out;
  for (Heuristic h : {Heuristic::CN, Heuristic::JC, Heuristic::AA, Heuristic::PA, Heuristic::RAI})
    out.push_back(LpMethod::heuristic(h));
  out.push_back(LpMethod::maxent("MaxEnt(full)", maxent_full_config()));
  out.push_back(LpMethod::maxent("MaxEnt(k=5)", maxent_blocked_config(128, 5)));
  return out;
}

std::vector<LpResult> lp_pipeline(const SparseGraph& g, std::span<const LpMethod> methods, double test_fraction,
                                  std::uint64_t seed) {
  const TrainTestSplit split = split_train_test(g, test_fraction, seed);
  const auto& pos = split.test_pos.pairs;
  if (pos.empty()) throw Error("link prediction: the split left no test edges");
  const EdgeSet neg = sample_nonedges(g, static_cast<std::int64_t>(pos.size()), seed + 0x9e3779b97f4a7c15ULL);

  std::vector<LpResult> out;
  for (const LpMethod& m : methods) {
    const auto start = std::chrono::steady_clock::now();
    const PairScorer score = m.train(split.train, seed);
    std::vector<double> ps, ns;
    ps.reserve(pos.size());
    ns.reserve(neg.pairs.size());
    for (const Edge& e : pos) ps.push_back(score(e.u, e.v));
    for (const Edge& e : neg.pairs) ns.push_back(score(e.u, e.v));
    const double a = auc(ps, ns);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back({m.name, a, secs, seed});
  }
  return out;
}

void write_lp_csv(std::ostream& out, std::span<const LpResult> results) {
  out << "method,seed,auc,seconds\n";
  for (const LpResult& r : results) out << r.method << ',' << r.seed << ',' << r.auc << ',' << r.seconds << '\n';
}

}  // namespace maxent
