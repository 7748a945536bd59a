#include "cutfunque/model.h"

#include <cmath>
#include <fstream>

#include "cutfunque/error.h"

namespace cutfunque {
namespace {

constexpr const char* kTypeNames[] = {"linear-svr", "gaussian-svr", "random-forest"};

PredictionError Bad(const std::string& what) { return PredictionError("invalid model: " + what); }

}  // namespace

QualityModel QualityModel::FromJson(const nlohmann::json& j) {
  QualityModel m;
  try {
    const std::string type = j.at("model_type").get<std::string>();
    int t = 0;
    while (t < 3 && type != kTypeNames[t]) ++t;
    if (t == 3) throw Bad("unknown model_type '" + type + "'");
    m.type_ = static_cast<Type>(t);
    m.manifest_hash_ = j.at("manifest_hash").get<std::string>();
    m.mean_ = j.at("normalization").at("mean").get<std::vector<double>>();
    m.scale_ = j.at("normalization").at("scale").get<std::vector<double>>();
    const size_t n = m.mean_.size();
    if (m.scale_.size() != n) throw Bad("normalization mean/scale lengths differ");
    for (double s : m.scale_)
      if (!(s != 0) || !std::isfinite(s)) throw Bad("normalization scale must be finite and nonzero");
    switch (m.type_) {
      case Type::kLinearSvr:
        m.weights_ = j.at("weights").get<std::vector<double>>();
        m.bias_ = j.at("bias").get<double>();
        if (m.weights_.size() != n) throw Bad("weights length differs from normalization");
        break;
      case Type::kGaussianSvr:
        m.support_vectors_ = j.at("support_vectors").get<std::vector<std::vector<double>>>();
        m.dual_coef_ = j.at("dual_coef").get<std::vector<double>>();
        m.gamma_ = j.at("gamma").get<double>();
        m.bias_ = j.at("bias").get<double>();
        if (m.support_vectors_.size() != m.dual_coef_.size()) throw Bad("dual_coef length differs from support_vectors");
        for (const auto& sv : m.support_vectors_)
          if (sv.size() != n) throw Bad("support vector length differs from normalization");
        break;
      case Type::kRandomForest:
        for (const auto& tree : j.at("trees")) {
          std::vector<TreeNode> nodes;
          for (const auto& node : tree.at("nodes"))
            nodes.push_back({node.at("feature").get<int>(), node.value("threshold", 0.0), node.value("left", -1),
                             node.value("right", -1), node.value("value", 0.0)});
          for (const auto& node : nodes) {
            if (node.feature < 0) continue;
            if (node.feature >= static_cast<int>(n)) throw Bad("tree split feature out of range");
            if (node.left < 0 || node.right < 0 || node.left >= static_cast<int>(nodes.size()) ||
                node.right >= static_cast<int>(nodes.size()))
              throw Bad("tree child index out of range");
          }
          if (nodes.empty()) throw Bad("empty tree");
          m.trees_.push_back(std::move(nodes));
        }
        if (m.trees_.empty()) throw Bad("forest has no trees");
        break;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Bad(e.what());
  }
  return m;
}

QualityModel QualityModel::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PredictionError("cannot open model " + path.string());
  try {
    return FromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw PredictionError("malformed model " + path.string() + ": " + e.what());
  }
}

nlohmann::json QualityModel::ToJson() const {
  nlohmann::json j;
  j["model_type"] = kTypeNames[static_cast<int>(type_)];
  j["manifest_hash"] = manifest_hash_;
  j["normalization"] = {{"mean", mean_}, {"scale", scale_}};
  switch (type_) {
    case Type::kLinearSvr:
      j["weights"] = weights_;
      j["bias"] = bias_;
      break;
    case Type::kGaussianSvr:
      j["support_vectors"] = support_vectors_;
      j["dual_coef"] = dual_coef_;
      j["gamma"] = gamma_;
      j["bias"] = bias_;
      break;
    case Type::kRandomForest: {
      nlohmann::json trees = nlohmann::json::array();
      for (const auto& tree : trees_) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : tree)
          nodes.push_back({{"feature", n.feature},
                           {"threshold", n.threshold},
                           {"left", n.left},
                           {"right", n.right},
                           {"value", n.value}});
        trees.push_back({{"nodes", nodes}});
      }
      j["trees"] = trees;
      break;
    }
  }
  return j;
}

double QualityModel::Predict(const FeatureVector& features, const FeatureManifest& manifest) const {
  if (manifest_hash_ != manifest.Hash())
    throw PredictionError("model manifest hash " + manifest_hash_ + " does not match runtime manifest " +
                          manifest.Hash());
  if (features.size() != mean_.size() || features.size() != manifest.size())
    throw PredictionError("feature vector has " + std::to_string(features.size()) + " entries, model expects " +
                          std::to_string(mean_.size()));
  std::vector<double> x(features.size());
  for (size_t i = 0; i < features.size(); ++i) {
    if (!features[i] || !std::isfinite(*features[i]))
      throw PredictionError("non-finite feature '" + manifest.entries()[i].name + "'");
    x[i] = (*features[i] - mean_[i]) / scale_[i];
  }
  return PredictNormalized(x);
}

double QualityModel::PredictNormalized(const std::vector<double>& x) const {
  switch (type_) {
    case Type::kLinearSvr: {
      double s = bias_;
      for (size_t i = 0; i < x.size(); ++i) s += weights_[i] * x[i];
      return s;
    }
    case Type::kGaussianSvr: {
      double s = bias_;
      for (size_t k = 0; k < support_vectors_.size(); ++k) {
        double d2 = 0;
        for (size_t i = 0; i < x.size(); ++i) d2 += (x[i] - support_vectors_[k][i]) * (x[i] - support_vectors_[k][i]);
        s += dual_coef_[k] * std::exp(-gamma_ * d2);
      }
      return s;
    }
    case Type::kRandomForest: {
      double s = 0;
      for (const auto& tree : trees_) {
        int node = 0;
        for (size_t depth = 0; tree[node].feature >= 0; ++depth) {
          if (depth > tree.size()) throw PredictionError("cycle in decision tree");
          node = x[tree[node].feature] <= tree[node].threshold ? tree[node].left : tree[node].right;
        }
        s += tree[node].value;
      }
      return s / static_cast<double>(trees_.size());
    }
  }
  return 0.0;
}

}  // namespace cutfunque
