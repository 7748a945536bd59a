#ifndef CUTFUNQUE_BINNING_H_
#define CUTFUNQUE_BINNING_H_

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "cutfunque/plane.h"

namespace cutfunque::binning {

inline constexpr int kBins = 4;
inline constexpr int kScales = 4;
inline constexpr double kMeanFloor = 1e-6;
inline constexpr double kEmptyWeight = 1e-6;
inline constexpr std::array<double, kScales> kScaleWeights = {0.0448, 0.2856, 0.3001, 0.2363};

enum class Measure { kL = 0, kS = 1, kT = 2 };
inline constexpr std::array<Measure, 3> kMeasures = {Measure::kL, Measure::kS, Measure::kT};

struct Domain {
  double lo = 0.0;
  double hi = 1.0;
};

struct BinConfig {
  std::array<Domain, 3> domains{};

  const Domain& domain(Measure m) const { return domains[static_cast<int>(m)]; }
  double Center(Measure m, int bin) const;
  double Width(Measure m) const;
};

// Per-cut low-level measures at one scale.
struct CutMeasures {
  RealPlane l;
  RealPlane s;
  RealPlane t;

  const RealPlane& get(Measure m) const { return m == Measure::kL ? l : m == Measure::kS ? s : t; }
};

int CutSize(int lambda);

// L and S over each cut of the (plain, rescaled) reference luma. S is the
// coefficient of variation, clamped at 1.
void SpatialMeasures(const RealPlane& luma, int lambda, CutMeasures& out);

// T over each cut from the buffered reference luma planes (oldest first, the
// current frame last): mean temporal std over mean temporal mean.
void TemporalMeasure(std::span<const RealPlane* const> frames, int lambda, CutMeasures& out);

double Membership(double measure, const BinConfig& cfg, Measure type, int bin);

// Membership plane of one bin for every cut.
RealPlane MembershipPlane(const RealPlane& measures, const BinConfig& cfg, Measure type, int bin);

// Weighted mean, or for SSIM-family maps 1 - (weighted mean of (1-s)^3)^(1/3).
// Empty (nullopt) when the weights sum below kEmptyWeight.
std::optional<double> Aggregate(const RealPlane& map, const RealPlane& weights, bool minkowski);

double UnweightedMean(const RealPlane& map);

// Min over non-empty bins for quality features, max for distortion features.
std::optional<double> WorstBin(std::span<const std::optional<double>> bins, bool distortion);

// Σ w_s Q_s / Σ w_s over the scales that are present.
std::optional<double> FuseScales(std::span<const std::optional<double>> values,
                                 std::span<const double> weights = kScaleWeights);

}  // namespace cutfunque::binning

#endif  // CUTFUNQUE_BINNING_H_
