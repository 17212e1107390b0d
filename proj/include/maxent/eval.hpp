#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maxent/graph.hpp"
#include "maxent/model.hpp"
#include "maxent/pipeline.hpp"

namespace maxent {

/// Mann-Whitney estimate of P(pos > neg), ties counted as one half.
double auc(std::span<const double> pos, std::span<const double> neg);

enum class Heuristic { CN, JC, AA, PA, RAI };

std::string to_string(Heuristic h);
Heuristic parse_heuristic(std::string_view name);

/// AA skips common neighbours of degree 1.
double heuristic_score(const SparseGraph& g, NodeId i, NodeId j, Heuristic h);

/// Independent-edge model that can be queried and sampled.
class EdgeModel {
 public:
  virtual ~EdgeModel() = default;
  virtual std::int64_t num_nodes() const = 0;
  virtual double edge_probability(NodeId i, NodeId j) const = 0;
  virtual SparseGraph sample(std::uint64_t seed) const = 0;
};

/// p_ij = min(1, d_i d_j / 2m).
class ChungLu final : public EdgeModel {
 public:
  explicit ChungLu(const SparseGraph& g);
  std::int64_t num_nodes() const override { return static_cast<std::int64_t>(degree_.size()); }
  double edge_probability(NodeId i, NodeId j) const override;
  SparseGraph sample(std::uint64_t seed) const override;

 private:
  std::vector<std::int64_t> degree_;
  std::vector<std::int64_t> labels_;
  double two_m_ = 0.0;
};

class MaxEntEdgeModel final : public EdgeModel {
 public:
  explicit MaxEntEdgeModel(FittedModel model) : model_(std::move(model)) {}
  std::int64_t num_nodes() const override { return model_.num_nodes(); }
  double edge_probability(NodeId i, NodeId j) const override { return maxent::edge_probability(model_, i, j); }
  SparseGraph sample(std::uint64_t seed) const override { return sample_graph(model_, seed); }
  const FittedModel& model() const { return model_; }

 private:
  FittedModel model_;
};

/// Category -> probability. Geodesic distributions use kInfDistance for
/// unreachable pairs.
using Distribution = std::map<std::int64_t, double>;
inline constexpr std::int64_t kInfDistance = std::numeric_limits<std::int64_t>::max();

/// Shortest-path lengths over unordered pairs, normalized by n(n-1)/2.
Distribution geodesic_distribution(const SparseGraph& g);
/// Number of edges (0..3) among node triples, normalized by C(n,3).
Distribution triad_census(const SparseGraph& g);
/// Common-neighbour count of each edge's endpoints, normalized by m.
Distribution edgewise_shared_partners(const SparseGraph& g);
std::int64_t triangle_count(const SparseGraph& g);

enum class GofStatistic { GEODESIC, TRIAD, ESP };
std::string to_string(GofStatistic s);
Distribution compute_statistic(const SparseGraph& g, GofStatistic s);

struct GofReport {
  GofStatistic statistic = GofStatistic::GEODESIC;
  Distribution observed;
  std::vector<Distribution> samples;
  // Over the union of observed and sampled categories; absent means 0.
  Distribution band_low;
  Distribution band_high;
  Distribution sample_mean;

  /// Fraction of categories whose observed value lies inside [low, high].
  double coverage() const;
};

/// Nearest-rank percentile: the ceil(p N)-th smallest value.
double nearest_rank_percentile(std::vector<double> values, double p);

/// Samples n_samples graphs and builds 90% bands (5th/95th percentile per
/// category) for every statistic.
std::vector<GofReport> gof_run(const EdgeModel& model, const SparseGraph& observed, int n_samples,
                               std::uint64_t seed);

/// CSV "statistic,category,observed,band_low,band_high,sample_mean".
void write_gof_csv(std::ostream& out, std::span<const GofReport> reports);

using PairScorer = std::function<double(NodeId, NodeId)>;

/// A link predictor: trained on the train graph, returns a pair scorer.
struct LpMethod {
  std::string name;
  std::function<PairScorer(const SparseGraph& train, std::uint64_t seed)> train;

  static LpMethod heuristic(Heuristic h);
  static LpMethod maxent(std::string name, MaxEntConfig cfg);
};

/// Degrees + exact CN, RAI and PA.
MaxEntConfig maxent_full_config();
/// Degrees + blocked CN and RAI (rank d, k bins) + PA binned by degree.
MaxEntConfig maxent_blocked_config(int d = 128, int k = 5);
/// The five heuristics, MaxEnt(full) and MaxEnt(k=5).
std::vector<LpMethod> default_lp_methods();

struct LpResult {
  std::string method;
  double auc = 0.0;
  double seconds = 0.0;
  std::uint64_t seed = 0;
};

/// Removes test_fraction of the edges keeping the train graph connected,
/// draws as many negatives from the non-edges of g, and scores both sets with
/// every method trained on the train graph.
std::vector<LpResult> lp_pipeline(const SparseGraph& g, std::span<const LpMethod> methods,
                                  double test_fraction, std::uint64_t seed);

/// CSV "method,seed,auc,seconds".
void write_lp_csv(std::ostream& out, std::span<const LpResult> results);

}  // namespace maxent
