#ifndef CUTFUNQUE_NSS_H_
#define CUTFUNQUE_NSS_H_

#include <array>
#include <span>
#include <vector>

#include "cutfunque/plane.h"

namespace cutfunque::nss {

inline constexpr double kMinShape = 0.05;
inline constexpr double kMaxShape = 10.0;
inline constexpr int kMinSamples = 64;
inline constexpr double kMinEnergy = 1e-10;
inline constexpr double kMinScale = 1e-6;
// Substituted for fits that fail on degenerate samples.
inline constexpr double kFallbackShape = 2.0;
inline constexpr double kFallbackScale = 1e-3;

struct GgdParams {
  double alpha = kFallbackShape;
  double b = kFallbackScale;
};

struct AggdParams {
  double alpha = kFallbackShape;
  double b_l = kFallbackScale;
  double b_r = kFallbackScale;
};

struct MscnConfig {
  int window = 7;
  double sigma = 7.0 / 6.0;
  double epsilon = 1e-3;  // already multiplied by the channel range
};

struct MscnPlanes {
  RealPlane mscn;
  RealPlane sigma;
  RealPlane sigma_mscn;
};

// Normalized Gaussian blur with symmetric mirror padding.
RealPlane GaussianBlur(const RealPlane& in, int window, double sigma);

MscnPlanes Mscn(const RealPlane& plane, const MscnConfig& cfg);

enum class Direction { kH, kV, kD1, kD2 };
inline constexpr std::array<Direction, 4> kDirections = {Direction::kH, Direction::kV, Direction::kD1,
                                                         Direction::kD2};

// Products of neighbouring coefficients with both pixels inside the
// rectangle [x0, x0+w) x [y0, y0+h).
void AppendProducts(const RealPlane& mscn, Direction d, int x0, int y0, int w, int h,
                    std::vector<double>& out);
std::vector<double> Products(const RealPlane& mscn, Direction d);

// Throws FitError on fewer than kMinSamples samples or E[x^2] < kMinEnergy.
GgdParams FitGgd(std::span<const double> samples);
AggdParams FitAggd(std::span<const double> samples);

GgdParams FitGgdOrFallback(std::span<const double> samples);
AggdParams FitAggdOrFallback(std::span<const double> samples);

// Inverts Γ(1/α)Γ(3/α)/Γ(2/α)² by bisection, clamped to [kMinShape, kMaxShape].
double InvertGgdRatio(double ratio);

// KL(GGD1 || GGD2) and KL(AGGD1 || AGGD2) in closed form.
double Fosd(const GgdParams& p1, const GgdParams& p2);
double Sosd(const AggdParams& p1, const AggdParams& p2);

AggdParams Average(std::span<const AggdParams> params);

inline constexpr int kGlobalFeatures = 7;
// GGD(MSCN) α, b; GGD(σ-MSCN) α, b; direction-averaged AGGD α, b_l, b_r.
std::array<double, kGlobalFeatures> GlobalNss(const RealPlane& luma, const MscnConfig& cfg);

// Frame-level FOSD between the MSCN GGD fits of reference and test.
double GlobalFosd(const RealPlane& ref_luma, const RealPlane& test_luma, const MscnConfig& cfg);

struct StSimMaps {
  RealPlane fosd;
  RealPlane sosd;
};

// Products of all four directions are pooled into one AGGD fit at scales
// 1 and 2; scales 3 and 4 average the four directional fits.
inline bool PoolsDirections(int lambda) { return lambda <= 2; }

// Cut origin along one axis: cuts overhanging the far edge are shifted inward.
int CutOrigin(int index, int cut, int extent);

StSimMaps LocalStSim(const RealPlane& ref_mscn, const RealPlane& test_mscn, int lambda);

}  // namespace cutfunque::nss

#endif  // CUTFUNQUE_NSS_H_
