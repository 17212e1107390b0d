#include "maxent/model_io.hpp"

#include <fstream>

#include <json.hpp>

namespace maxent {

using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols) throw Error("model file: ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json feature_to_json(const BlockFeature& f) {
  json j;
  j["kind"] = to_string(f.spec().kind);
  j["coeffs"] = f.spec().coeffs;
  j["d"] = f.d;
  j["k"] = f.k;
  j["assignment"] = f.partition().assignment;
  if (f.factored()) {
    j["bin_rows"] = matrix_to_json(f.bin_rows());
    j["signs"] = std::vector<double>(f.signs().data(), f.signs().data() + f.signs().size());
  } else {
    j["block_values"] = matrix_to_json(f.block_values());
  }
  return j;
}

BlockFeature feature_from_json(const json& j) {
  FeatureSpec spec{parse_feature_kind(j.at("kind").get<std::string>()), j.at("coeffs").get<std::vector<double>>()};
  NodePartition part = NodePartition::from_assignment(j.at("assignment").get<std::vector<int>>());
  BlockFeature f;
  if (j.contains("bin_rows")) {
    f = BlockFeature::from_rows(spec, std::move(part), matrix_from_json(j.at("bin_rows")),
                                vector_from_json(j.at("signs")));
  } else {
    f = BlockFeature::from_values(spec, std::move(part), matrix_from_json(j.at("block_values")));
  }
  f.d = j.at("d").get<int>();
  f.k = j.at("k").get<int>();
  return f;
}

}  // namespace

void save_model(const FittedModel& model, std::ostream& out) {
  const ReducedProblem& rp = *model.reduced;
  json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["num_nodes"] = rp.n;
  j["num_edges"] = rp.num_edges;
  j["labels"] = model.labels;
  j["use_degrees"] = rp.use_degrees;
  j["features"] = json::array();
  for (const auto& f : rp.features) j["features"].push_back(feature_to_json(*f));
  j["targets"] = std::vector<double>(rp.global_targets.data(), rp.global_targets.data() + rp.global_targets.size());
  j["glb"] = rp.glb.assignment;
  j["groups"] = {{"group_of", rp.group_of},
                 {"sizes", rp.sizes},
                 {"degree", rp.degree},
                 {"unique_degrees", rp.unique_degrees}};
  j["lambda"] = std::vector<double>(model.lambda.data(), model.lambda.data() + model.lambda.size());
  j["gamma"] = std::vector<double>(model.gamma.data(), model.gamma.data() + model.gamma.size());
  j["converged"] = model.converged;
  j["grad_norm"] = model.grad_norm;
  j["dual_value"] = model.dual_value;
  j["iterations"] = model.iterations;
  j["message"] = model.message;
  j["warnings"] = model.warnings;
  out << j.dump() << '\n';
  if (!out) throw Error("failed to write model");
}

void save_model(const FittedModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  save_model(model, out);
}

FittedModel load_model(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.value("format", "") != kModelFormat) throw Error("not a model file (format tag missing or wrong)");
    const int version = j.at("version").get<int>();
    if (version != kModelVersion)
      throw Error("unsupported model file version " + std::to_string(version) + " (this build reads version " +
                  std::to_string(kModelVersion) + ")");

    auto rp = std::make_shared<ReducedProblem>();
    rp->n = j.at("num_nodes").get<std::int64_t>();
    rp->num_edges = j.at("num_edges").get<std::int64_t>();
    rp->use_degrees = j.at("use_degrees").get<bool>();
    for (const auto& f : j.at("features")) {
      auto bf = std::make_shared<const BlockFeature>(feature_from_json(f));
      if (bf->num_nodes() != rp->n) throw Error("feature covers a different number of nodes");
      rp->features.push_back(std::move(bf));
    }
    rp->global_targets = vector_from_json(j.at("targets"));
    rp->glb = NodePartition::from_assignment(j.at("glb").get<std::vector<int>>());
    const json& groups = j.at("groups");
    rp->group_of = groups.at("group_of").get<std::vector<int>>();
    rp->sizes = groups.at("sizes").get<std::vector<std::int64_t>>();
    rp->degree = groups.at("degree").get<std::vector<std::int64_t>>();
    rp->unique_degrees = groups.at("unique_degrees").get<std::int64_t>();

    const int g_count = rp->groups();
    if (static_cast<std::int64_t>(rp->group_of.size()) != rp->n || rp->glb.num_nodes() != rp->n ||
        static_cast<int>(rp->degree.size()) != g_count)
      throw Error("group table does not match the node count");
    std::vector<NodeId> rep(static_cast<std::size_t>(g_count), -1);
    for (std::int64_t i = 0; i < rp->n; ++i) {
      const int g = rp->group_of[i];
      if (g < 0 || g >= g_count) throw Error("group id out of range");
      if (rep[g] < 0) rep[g] = static_cast<NodeId>(i);
    }
    rp->group_bin.resize(g_count);
    rp->degree_targets.resize(g_count);
    for (int g = 0; g < g_count; ++g) {
      if (rep[g] < 0) throw Error("empty group in model file");
      rp->group_bin[g] = rp->glb.assignment[rep[g]];
      rp->degree_targets[g] = rp->use_degrees ? static_cast<double>(rp->sizes[g] * rp->degree[g]) : 0.0;
    }
    rp->feature_bin.resize(rp->features.size());
    for (std::size_t l = 0; l < rp->features.size(); ++l) {
      rp->feature_bin[l].resize(g_count);
      for (int g = 0; g < g_count; ++g) rp->feature_bin[l][g] = rp->features[l]->bin_of(rep[g]);
    }
    if (rp->global_targets.size() != rp->num_features()) throw Error("target count does not match features");

    FittedModel model;
    model.lambda = vector_from_json(j.at("lambda"));
    model.gamma = vector_from_json(j.at("gamma"));
    if (model.lambda.size() != (rp->use_degrees ? g_count : 0) || model.gamma.size() != rp->num_features())
      throw Error("multiplier count does not match the group table");
    model.reduced = std::move(rp);
    model.labels = j.at("labels").get<std::vector<std::int64_t>>();
    if (static_cast<std::int64_t>(model.labels.size()) != model.reduced->n) throw Error("relabel map has wrong size");
    model.converged = j.at("converged").get<bool>();
    model.grad_norm = j.at("grad_norm").get<double>();
    model.dual_value = j.at("dual_value").get<double>();
    model.iterations = j.at("iterations").get<int>();
    model.message = j.value("message", "");
    model.warnings = j.value("warnings", std::vector<std::string>{});
    return model;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed model file: ") + e.what());
  }
}

FittedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file '" + path + "'");
  return load_model(in);
}

}  // namespace maxent
