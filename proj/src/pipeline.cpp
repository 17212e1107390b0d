#include "maxent/pipeline.hpp"

#include <algorithm>
#include <chrono>

namespace maxent {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void MaxEntConfig::validate() const {
  if (!use_degrees && features.empty()) throw Error("model has no constraints");
  for (const auto& f : features) f.validate();
  if (d < 1) throw Error("rank d must be at least 1");
  if (k < 1) throw Error("bin count k must be at least 1");
  opt.validate();
}

std::vector<FeaturePtr> build_features(const SparseGraph& g, const MaxEntConfig& cfg, PhaseTimes* times) {
  cfg.validate();
  const int n = static_cast<int>(g.num_nodes());
  const int d = std::min(cfg.d, n);
  const int k = std::min(cfg.k, n);
  std::vector<FeaturePtr> out;
  for (std::size_t l = 0; l < cfg.features.size(); ++l) {
    const FeatureSpec& spec = cfg.features[l];
    if (spec.kind == FeatureKind::PA) {
      out.push_back(std::make_shared<const BlockFeature>(degree_block_feature(g)));
      continue;
    }
    if (cfg.exact) {
      const auto start = std::chrono::steady_clock::now();
      out.push_back(std::make_shared<const BlockFeature>(exact_block_feature(g, spec)));
      if (times) times->eig += seconds_since(start);
      continue;
    }
    auto start = std::chrono::steady_clock::now();
    EigOptions eig = cfg.eig;
    eig.seed = cfg.seed + l;
    const LowRankFactor factor = lowrank_feature(g, spec, d, eig);
    if (times) times->eig += seconds_since(start);
    start = std::chrono::steady_clock::now();
    BlockFeature bf = block_feature(factor, spec, k, cfg.km, cfg.seed + 1000 + l);
    if (times) times->kmeans += seconds_since(start);
    out.push_back(std::make_shared<const BlockFeature>(std::move(bf)));
  }
  return out;
}

PipelineResult fit_pipeline(const SparseGraph& g, const MaxEntConfig& cfg) {
  PipelineResult res;
  std::vector<FeaturePtr> features = build_features(g, cfg, &res.times);
  const ModelSpec spec = make_model_spec(g, cfg.use_degrees, std::move(features));
  const auto start = std::chrono::steady_clock::now();
  res.model = fit(g, spec, cfg.opt);
  res.times.opt = seconds_since(start);
  return res;
}

}  // namespace maxent
