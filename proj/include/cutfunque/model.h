#ifndef CUTFUNQUE_MODEL_H_
#define CUTFUNQUE_MODEL_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cutfunque/manifest.h"
#include "json.hpp"

namespace cutfunque {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

// Regressor mapping a normalized feature vector to a quality score.
class QualityModel {
 public:
  enum class Type { kLinearSvr, kGaussianSvr, kRandomForest };

  static QualityModel FromJson(const nlohmann::json& j);
  static QualityModel Load(const std::filesystem::path& path);
  nlohmann::json ToJson() const;

  Type type() const { return type_; }
  const std::string& manifest_hash() const { return manifest_hash_; }
  size_t num_features() const { return mean_.size(); }

  // Throws PredictionError on a hash mismatch, a length mismatch or a
  // non-finite/absent feature (named from the manifest).
  double Predict(const FeatureVector& features, const FeatureManifest& manifest) const;

 private:
  double PredictNormalized(const std::vector<double>& x) const;

  Type type_ = Type::kLinearSvr;
  std::string manifest_hash_;
  std::vector<double> mean_;
  std::vector<double> scale_;
  std::vector<double> weights_;
  double bias_ = 0.0;
  std::vector<std::vector<double>> support_vectors_;
  std::vector<double> dual_coef_;
  double gamma_ = 0.0;
  std::vector<std::vector<TreeNode>> trees_;
};

}  // namespace cutfunque

#endif  // CUTFUNQUE_MODEL_H_
