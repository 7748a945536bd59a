#ifndef CUTFUNQUE_MANIFEST_H_
#define CUTFUNQUE_MANIFEST_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cutfunque/binning.h"
#include "cutfunque/nss.h"
#include "cutfunque/wavelet_features.h"
#include "json.hpp"

namespace cutfunque {

struct FeatureDescriptor {
  std::string name;
  std::string source;       // "<variant>/<source>", e.g. "hdrmax/L-VIF"
  std::string aggregation;  // mean | worst-L | worst-S | worst-T | bin-<M><b> | global
  std::string polarity;     // quality | distortion | neutral

  bool operator==(const FeatureDescriptor&) const = default;
};

class FeatureManifest {
 public:
  FeatureManifest() = default;
  explicit FeatureManifest(std::vector<FeatureDescriptor> entries) : entries_(std::move(entries)) {}

  // The 232-entry manifest this build computes.
  static FeatureManifest Canonical();
  static FeatureManifest FromJson(const nlohmann::json& j);
  static FeatureManifest Load(const std::filesystem::path& path);
  nlohmann::json ToJson() const;

  const std::vector<FeatureDescriptor>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }

  // FNV-1a 64 over "name\tsource\taggregation\tpolarity\n" lines, 16 hex digits.
  std::string Hash() const;

 private:
  std::vector<FeatureDescriptor> entries_;
};

inline constexpr int kVariants = 2;
inline constexpr std::array<const char*, kVariants> kVariantNames = {"plain", "hdrmax"};
inline constexpr std::array<const char*, nss::kGlobalFeatures> kNssNames = {
    "mscn_alpha", "mscn_b", "sigma_mscn_alpha", "sigma_mscn_b", "aggd_alpha", "aggd_b_l", "aggd_b_r"};

// Everything one frame contributes to the feature vector.
struct VariantFrame {
  features::QualityMaps maps;
  std::array<std::optional<nss::StSimMaps>, binning::kScales> stsim;
  std::optional<std::array<double, nss::kGlobalFeatures>> global_nss;
  std::optional<double> global_fosd;
};

struct FrameData {
  std::array<VariantFrame, kVariants> variants;
  std::array<binning::CutMeasures, binning::kScales> measures;
};

using FeatureVector = std::vector<std::optional<double>>;

// Absent values (temporal maps on the first frame) stay nullopt. Throws
// AssemblyError naming any entry the frame cannot supply.
FeatureVector AssembleFrame(const FrameData& frame, const FeatureManifest& manifest,
                            const binning::BinConfig& cfg = {});

// Per-entry mean over the frames where the entry is present.
FeatureVector PoolFrames(const std::vector<FeatureVector>& frames);

std::string Fnv1a64Hex(std::string_view text);

}  // namespace cutfunque

#endif  // CUTFUNQUE_MANIFEST_H_
