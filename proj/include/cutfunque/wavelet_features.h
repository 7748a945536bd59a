#ifndef CUTFUNQUE_WAVELET_FEATURES_H_
#define CUTFUNQUE_WAVELET_FEATURES_H_

#include <array>
#include <optional>
#include <string_view>

#include "cutfunque/plane.h"
#include "cutfunque/wavelet.h"

namespace cutfunque::features {

inline constexpr double kC1 = 0.01 * 0.01;
inline constexpr double kC2 = 0.03 * 0.03;
inline constexpr double kVarianceFloor = 1e-12;
// A cut at scale λ spans kCutWindows x kCutWindows level-λ windows.
inline constexpr int kCutWindows = 4;
inline constexpr int kScales = wavelet::kLevels;

struct VifConfig {
  double noise_var = 0.1;
};

enum class MapId {
  kLSsimMu,
  kLSsimSigma,
  kCSsimMu,
  kCSsimSigma,
  kLVif,
  kCVif,
  kLTVif,
  kCTVif,
  kLSRred,
  kLTRred,
  kCSRred,
  kCTRred,
  kDlm,
};
inline constexpr int kNumMaps = 13;

std::string_view MapName(MapId id);
bool IsSsimFamily(MapId id);
bool IsDistortion(MapId id);
bool IsTemporal(MapId id);

// Per-window maps at one scale.
RealPlane SsimMuWindows(const wavelet::ScaleMoments<double>& m);
RealPlane SsimSigmaWindows(const wavelet::ScaleMoments<double>& m);
RealPlane SsimMuWindows(const wavelet::ScaleMoments<std::complex<double>>& m);
RealPlane SsimSigmaWindows(const wavelet::ScaleMoments<std::complex<double>>& m);
RealPlane VifWindows(const wavelet::ScaleMoments<double>& m, const VifConfig& cfg);
RealPlane VifWindows(const wavelet::ScaleMoments<std::complex<double>>& m, const VifConfig& cfg);
RealPlane RredWindows(const RealPlane& var_ref, const RealPlane& var_test, const VifConfig& cfg);

double VifValue(double var_x, double var_y, double cov_norm, double noise_var);
double RredEntropy(double var, double noise_var);

// Mean of each kCutWindows x kCutWindows block (partial blocks at the edges
// average what they cover).
RealPlane ReduceToCuts(const RealPlane& windows);

int CutGridWidth(int frame_width, int lambda);
int CutGridHeight(int frame_height, int lambda);

// Cut-level DLM from CSF-weighted luma pyramids at level λ.
RealPlane DlmCuts(const wavelet::RealPyramid& ref, const wavelet::RealPyramid& test, int lambda);

using ScaleMaps = std::array<std::optional<RealPlane>, kNumMaps>;
using QualityMaps = std::array<ScaleMaps, kScales>;

struct ChannelPyramids {
  wavelet::RealPyramid luma;
  wavelet::ComplexPyramid chroma;
};

// SSIM, spatial VIF, spatial RRED and DLM maps at every scale.
void SpatialMaps(const ChannelPyramids& ref, const ChannelPyramids& test, const VifConfig& cfg,
                 QualityMaps& maps);

// TVIF and TRRED from frame-difference pyramids.
void TemporalMaps(const ChannelPyramids& ref, const ChannelPyramids& ref_prev,
                  const ChannelPyramids& test, const ChannelPyramids& test_prev, const VifConfig& cfg,
                  QualityMaps& maps);

}  // namespace cutfunque::features

#endif  // CUTFUNQUE_WAVELET_FEATURES_H_
