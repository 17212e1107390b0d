#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

#include "detail/rng.hpp"
#include "maxent/sampling.hpp"

namespace maxent {

namespace {

// k distinct values from [0, total), uniformly (Floyd's algorithm).
std::vector<std::int64_t> choose_distinct(std::int64_t total, std::int64_t k, std::mt19937_64& rng) {
  std::vector<std::int64_t> out;
  if (k <= 0) return out;
  out.reserve(static_cast<std::size_t>(k));
  if (k == total) {
    for (std::int64_t t = 0; t < total; ++t) out.push_back(t);
    return out;
  }
  if (2 * k > total) {
    auto skip = choose_distinct(total, total - k, rng);
    std::sort(skip.begin(), skip.end());
    auto it = skip.begin();
    for (std::int64_t t = 0; t < total; ++t) {
      if (it != skip.end() && *it == t) {
        ++it;
        continue;
      }
      out.push_back(t);
    }
    return out;
  }
  std::unordered_set<std::int64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(2 * k));
  for (std::int64_t j = total - k; j < total; ++j) {
    std::uniform_int_distribution<std::int64_t> pick(0, j);
    const std::int64_t t = pick(rng);
    const std::int64_t v = chosen.insert(t).second ? t : (chosen.insert(j), j);
    out.push_back(v);
  }
  return out;
}

// Inverse of the row-major enumeration of pairs (a, b), a < b < s.
std::pair<std::int64_t, std::int64_t> unrank_pair(std::int64_t t, std::int64_t s) {
  const double ds = static_cast<double>(s);
  auto a = static_cast<std::int64_t>(
      ds - 2 - std::floor(std::sqrt(-8.0 * static_cast<double>(t) + 4.0 * ds * (ds - 1) - 7) / 2.0 - 0.5));
  auto row_start = [s](std::int64_t r) { return r * s - r * (r + 1) / 2; };
  a = std::clamp<std::int64_t>(a, 0, s - 2);
  while (a > 0 && row_start(a) > t) --a;
  while (a + 1 <= s - 2 && row_start(a + 1) <= t) ++a;
  const std::int64_t b = a + 1 + (t - row_start(a));
  return {a, b};
}

}  // namespace

SparseGraph sample_grouped(std::int64_t n, const std::vector<std::vector<NodeId>>& members,
                           const std::function<double(int, int)>& prob, std::uint64_t seed,
                           std::vector<std::int64_t> labels) {
  auto rng = detail::make_rng(seed, 0x5a3b1e);
  std::vector<Edge> edges;
  const int groups = static_cast<int>(members.size());
  for (int g = 0; g < groups; ++g) {
    const auto sg = static_cast<std::int64_t>(members[g].size());
    for (int h = g; h < groups; ++h) {
      const auto sh = static_cast<std::int64_t>(members[h].size());
      const std::int64_t total = (g == h) ? sg * (sg - 1) / 2 : sg * sh;
      if (total == 0) continue;
      const double p = std::clamp(prob(g, h), 0.0, 1.0);
      std::int64_t count;
      if (p <= 0.0) {
        continue;
      } else if (p >= 1.0) {
        count = total;
      } else {
        std::binomial_distribution<std::int64_t> draw(total, p);
        count = draw(rng);
      }
      for (std::int64_t t : choose_distinct(total, count, rng)) {
        if (g == h) {
          auto [a, b] = unrank_pair(t, sg);
          edges.push_back({members[g][a], members[g][b]});
        } else {
          edges.push_back({members[g][t / sh], members[h][t % sh]});
        }
      }
    }
  }
  return SparseGraph::from_edges(n, edges, std::move(labels));
}

}  // namespace maxent
