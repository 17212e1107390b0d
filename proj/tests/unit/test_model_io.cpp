#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "maxent/model_io.hpp"
#include "maxent/pipeline.hpp"
#include "support.hpp"

using namespace maxent;
using namespace testing_support;

namespace {

FittedModel round_trip(const FittedModel& m) {
  std::stringstream buf;
  save_model(m, buf);
  return load_model(buf);
}

// Probabilities must survive bit for bit: the file stores shortest
// round-trip decimal representations.
void expect_same_probabilities(const FittedModel& a, const FittedModel& b, std::uint64_t seed) {
  ASSERT_EQ(a.num_nodes(), b.num_nodes());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<NodeId> node(0, a.num_nodes() - 1);
  for (int t = 0; t < 1000; ++t) {
    const NodeId i = node(rng);
    NodeId j = node(rng);
    if (i == j) j = (j + 1) % a.num_nodes();
    ASSERT_EQ(edge_probability(a, i, j), edge_probability(b, i, j)) << i << "," << j;
  }
}

std::string saved(const FittedModel& m) {
  std::stringstream buf;
  save_model(m, buf);
  return buf.str();
}

FittedModel blocked_model() {
  const auto g = random_graph(120, 0.06, 4);
  MaxEntConfig cfg;
  cfg.features = {FeatureSpec::of(FeatureKind::CN), FeatureSpec::of(FeatureKind::RAI),
                  FeatureSpec::of(FeatureKind::PA)};
  cfg.d = 8;
  cfg.k = 4;
  return fit_pipeline(g, cfg).model;
}

}  // namespace

TEST(ModelFile, BlockedModelRoundTrip) {
  const auto m = blocked_model();
  const auto back = round_trip(m);
  expect_same_probabilities(m, back, 1);
  EXPECT_EQ(back.reduced->groups(), m.reduced->groups());
  EXPECT_EQ(back.lambda, m.lambda);
  EXPECT_EQ(back.gamma, m.gamma);
  EXPECT_EQ(back.converged, m.converged);
  EXPECT_EQ(back.iterations, m.iterations);
  EXPECT_EQ(back.warnings, m.warnings);
  // Saving again yields the same file.
  EXPECT_EQ(saved(back), saved(m));
}

TEST(ModelFile, ExactAndDegreeFreeModelsRoundTrip) {
  const auto g = random_graph(40, 0.15, 9);
  MaxEntConfig exact;
  exact.features = {FeatureSpec::of(FeatureKind::CN)};
  exact.exact = true;
  const auto m1 = fit_pipeline(g, exact).model;
  expect_same_probabilities(m1, round_trip(m1), 2);

  MaxEntConfig bare;
  bare.use_degrees = false;
  bare.features = {FeatureSpec::of(FeatureKind::PA)};
  const auto m2 = fit_pipeline(g, bare).model;
  ASSERT_EQ(m2.lambda.size(), 0);
  expect_same_probabilities(m2, round_trip(m2), 3);
}

TEST(ModelFile, LabelsAndSamplesSurvive) {
  std::istringstream text("10 20\n20 30\n30 10\n40 10\n");
  const auto g = parse_edge_list(text);
  const auto m = fit(g, make_model_spec(g, true, {}));
  const auto back = round_trip(m);
  EXPECT_EQ(back.labels, m.labels);
  EXPECT_EQ(back.labels, g.labels());
  EXPECT_EQ(sample_graph(back, 5).edges(), sample_graph(m, 5).edges());
  EXPECT_DOUBLE_EQ(log_likelihood(back, g), log_likelihood(m, g));
}

TEST(ModelFile, RefusesOtherFormatsAndVersions) {
  const std::string good = saved(blocked_model());
  auto replace = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    const auto at = s.find(from);
    EXPECT_NE(at, std::string::npos) << from;
    s.replace(at, from.size(), to);
    return s;
  };
  auto load = [](const std::string& s) {
    std::istringstream in(s);
    return load_model(in);
  };
  EXPECT_NO_THROW(load(good));
  EXPECT_THROW(load(replace("\"version\":1", "\"version\":2")), Error);
  EXPECT_THROW(load(replace("\"format\":\"maxent-model\"", "\"format\":\"other\"")), Error);
  EXPECT_THROW(load("{\"version\":1}"), Error);
  EXPECT_THROW(load("not json"), Error);
  EXPECT_THROW(load(good.substr(0, good.size() / 2)), Error);
  EXPECT_THROW(load(replace("\"lambda\":[", "\"lambda\":[0.0,")), Error);
  EXPECT_THROW(load_model(std::string("/nonexistent/model.json")), Error);
}

TEST(ModelFile, VersionErrorNamesBothVersions) {
  std::string s = saved(blocked_model());
  s.replace(s.find("\"version\":1"), 11, "\"version\":7");
  std::istringstream in(s);
  try {
    load_model(in);
    FAIL() << "version 7 accepted";
  } catch (const Error& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find('7'), std::string::npos) << what;
    EXPECT_NE(what.find(std::to_string(kModelVersion)), std::string::npos) << what;
  }
}
