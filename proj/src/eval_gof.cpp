#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "maxent/eval.hpp"
#include "maxent/sampling.hpp"

namespace maxent {

namespace {

std::int64_t common_neighbors(const SparseGraph& g, NodeId u, NodeId v) {
  auto a = g.neighbors(u);
  auto b = g.neighbors(v);
  std::int64_t c = 0;
  for (std::size_t x = 0, y = 0; x < a.size() && y < b.size();) {
    if (a[x] < b[y]) {
      ++x;
    } else if (b[y] < a[x]) {
      ++y;
    } else {
      ++c;
      ++x;
      ++y;
    }
  }
  return c;
}

Distribution normalize(const std::map<std::int64_t, std::int64_t>& counts, double total) {
  Distribution out;
  for (auto [cat, c] : counts)
    if (c > 0) out[cat] = static_cast<double>(c) / total;
  return out;
}

}  // namespace

ChungLu::ChungLu(const SparseGraph& g) : degree_(g.degrees()), labels_(g.labels()) {
  if (g.num_edges() < 1) throw Error("Chung-Lu model needs at least one edge");
  two_m_ = 2.0 * static_cast<double>(g.num_edges());
}

double ChungLu::edge_probability(NodeId i, NodeId j) const {
  if (i < 0 || j < 0 || i >= num_nodes() || j >= num_nodes()) throw Error("node id out of range");
  if (i == j) throw Error("edge probability is undefined for a self-pair");
  return std::min(1.0, static_cast<double>(degree_[i]) * static_cast<double>(degree_[j]) / two_m_);
}

SparseGraph ChungLu::sample(std::uint64_t seed) const {
  // Probabilities depend on degrees only, so nodes are grouped by degree.
  std::map<std::int64_t, int> group_of_degree;
  for (std::int64_t d : degree_) group_of_degree.emplace(d, 0);
  std::vector<double> group_degree;
  for (auto& [d, id] : group_of_degree) {
    id = static_cast<int>(group_degree.size());
    group_degree.push_back(static_cast<double>(d));
  }
  std::vector<std::vector<NodeId>> members(group_degree.size());
  for (std::size_t i = 0; i < degree_.size(); ++i)
    members[group_of_degree[degree_[i]]].push_back(static_cast<NodeId>(i));
  return sample_grouped(
      num_nodes(), members,
      [&](int g, int h) { return std::min(1.0, group_degree[g] * group_degree[h] / two_m_); }, seed, labels_);
}

Distribution geodesic_distribution(const SparseGraph& g) {
  const std::int64_t n = g.num_nodes();
  if (n < 2) throw Error("geodesic distribution needs at least two nodes");
  std::map<std::int64_t, std::int64_t> counts;
  std::vector<std::int64_t> dist(static_cast<std::size_t>(n));
  std::vector<NodeId> queue(static_cast<std::size_t>(n));
  std::int64_t reached = 0;
  for (NodeId s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    std::size_t head = 0, tail = 0;
    queue[tail++] = s;
    while (head < tail) {
      const NodeId u = queue[head++];
      for (NodeId v : g.neighbors(u)) {
        if (dist[v] >= 0) continue;
        dist[v] = dist[u] + 1;
        queue[tail++] = v;
        if (v > s) {
          ++counts[dist[v]];
          ++reached;
        }
      }
    }
  }
  const std::int64_t pairs = n * (n - 1) / 2;
  counts[kInfDistance] = pairs - reached;
  return normalize(counts, static_cast<double>(pairs));
}

std::int64_t triangle_count(const SparseGraph& g) {
  std::int64_t t = 0;
  for (const Edge& e : g.edges()) t += common_neighbors(g, e.u, e.v);
  return t / 3;
}

Distribution triad_census(const SparseGraph& g) {
  const std::int64_t n = g.num_nodes();
  if (n < 3) throw Error("triad census needs at least three nodes");
  const std::int64_t m = g.num_edges();
  const std::int64_t t = triangle_count(g);
  std::int64_t wedges = 0;
  for (std::int64_t d : g.degrees()) wedges += d * (d - 1) / 2;
  const std::int64_t two = wedges - 3 * t;
  const std::int64_t one = m * (n - 2) - 2 * two - 3 * t;
  const std::int64_t triples = n * (n - 1) / 2 * (n - 2) / 3;
  const std::int64_t zero = triples - one - two - t;
  return normalize({{0, zero}, {1, one}, {2, two}, {3, t}}, static_cast<double>(triples));
}

Distribution edgewise_shared_partners(const SparseGraph& g) {
  if (g.num_edges() < 1) throw Error("shared-partner distribution needs at least one edge");
  std::map<std::int64_t, std::int64_t> counts;
  for (const Edge& e : g.edges()) ++counts[common_neighbors(g, e.u, e.v)];
  return normalize(counts, static_cast<double>(g.num_edges()));
}

std::string to_string(GofStatistic s) {
  switch (s) {
    case GofStatistic::GEODESIC: return "geodesic";
    case GofStatistic::TRIAD: return "triad";
    case GofStatistic::ESP: return "esp";
  }
  return "?";
}

Distribution compute_statistic(const SparseGraph& g, GofStatistic s) {
  switch (s) {
    case GofStatistic::GEODESIC: return geodesic_distribution(g);
    case GofStatistic::TRIAD: return triad_census(g);
    case GofStatistic::ESP: return g.num_edges() ? edgewise_shared_partners(g) : Distribution{};
  }
  return {};
}

double GofReport::coverage() const {
  if (band_low.empty()) return 1.0;
  std::int64_t inside = 0;
  for (const auto& [cat, low] : band_low) {
    const auto it = observed.find(cat);
    const double obs = it == observed.end() ? 0.0 : it->second;
    const double high = band_high.at(cat);
    if (obs >= low - 1e-12 && obs <= high + 1e-12) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(band_low.size());
}

double nearest_rank_percentile(std::vector<double> values, double p) {
  if (values.empty()) throw Error("percentile of an empty sample");
  if (!(p > 0.0 && p <= 1.0)) throw Error("percentile level must be in (0, 1]");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-12));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

std::vector<GofReport> gof_run(const EdgeModel& model, const SparseGraph& observed, int n_samples,
                               std::uint64_t seed) {
  if (n_samples < 2) throw Error("goodness of fit needs at least two samples");
  if (model.num_nodes() != observed.num_nodes()) throw Error("model and observed graph differ in node count");
  const std::vector<GofStatistic> stats{GofStatistic::GEODESIC, GofStatistic::TRIAD, GofStatistic::ESP};
  std::vector<GofReport> reports(stats.size());
  for (std::size_t s = 0; s < stats.size(); ++s) {
    reports[s].statistic = stats[s];
    reports[s].observed = compute_statistic(observed, stats[s]);
  }
  for (int r = 0; r < n_samples; ++r) {
    const SparseGraph sample = model.sample(seed + static_cast<std::uint64_t>(r));
    for (std::size_t s = 0; s < stats.size(); ++s) reports[s].samples.push_back(compute_statistic(sample, stats[s]));
  }
  for (GofReport& rep : reports) {
    std::set<std::int64_t> cats;
    for (const auto& [c, v] : rep.observed) cats.insert(c);
    for (const auto& dist : rep.samples)
      for (const auto& [c, v] : dist) cats.insert(c);
    for (std::int64_t c : cats) {
      std::vector<double> vals;
      for (const auto& dist : rep.samples) {
        const auto it = dist.find(c);
        vals.push_back(it == dist.end() ? 0.0 : it->second);
      }
      double sum = 0.0;
      for (double v : vals) sum += v;
      rep.sample_mean[c] = sum / static_cast<double>(vals.size());
      rep.band_low[c] = nearest_rank_percentile(vals, 0.05);
      rep.band_high[c] = nearest_rank_percentile(vals, 0.95);
    }
  }
  return reports;
}

void write_gof_csv(std::ostream& out, std::span<const GofReport> reports) {
  out << "statistic,category,observed,band_low,band_high,sample_mean\n";
  for (const GofReport& rep : reports) {
    for (const auto& [cat, low] : rep.band_low) {
      const auto it = rep.observed.find(cat);
      out << to_string(rep.statistic) << ',';
      if (cat == kInfDistance)
        out << "Inf";
      else
        out << cat;
      out << ',' << (it == rep.observed.end() ? 0.0 : it->second) << ',' << low << ',' << rep.band_high.at(cat)
          << ',' << rep.sample_mean.at(cat) << '\n';
    }
  }
}

}  // namespace maxent
