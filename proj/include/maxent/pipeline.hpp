#pragma once

#include <cstdint>
#include <vector>

#include "maxent/features.hpp"
#include "maxent/graph.hpp"
#include "maxent/model.hpp"
#include "maxent/optimizer.hpp"
#include "maxent/spectral.hpp"

namespace maxent {

/// End-to-end model configuration: which constraints, and how each feature is
/// approximated.
struct MaxEntConfig {
  bool use_degrees = true;
  std::vector<FeatureSpec> features;
  bool exact = false;  // exact features (one node per bin) instead of blocks
  int d = 128;
  int k = 5;
  std::uint64_t seed = 0;
  OptimizerOpts opt;
  KMeansOptions km;
  EigOptions eig;

  void validate() const;
};

struct PhaseTimes {
  double eig = 0.0;
  double kmeans = 0.0;
  double opt = 0.0;
  double total() const { return eig + kmeans + opt; }
};

struct PipelineResult {
  FittedModel model;
  PhaseTimes times;
};

/// Builds every feature, then the reduced problem. PA is always binned by
/// degree, which is exact. d and k are capped at n.
std::vector<FeaturePtr> build_features(const SparseGraph& g, const MaxEntConfig& cfg, PhaseTimes* times = nullptr);

PipelineResult fit_pipeline(const SparseGraph& g, const MaxEntConfig& cfg);

}  // namespace maxent
