#ifndef CUTFUNQUE_WAVELET_H_
#define CUTFUNQUE_WAVELET_H_

#include <array>
#include <complex>
#include <filesystem>
#include <type_traits>
#include <vector>

#include "cutfunque/plane.h"
#include "cutfunque/pucolor.h"
#include "json.hpp"

namespace cutfunque::wavelet {

inline constexpr int kLevels = 4;
inline constexpr int kPadMultiple = 16;

enum Band { kA = 0, kH = 1, kV = 2, kD = 3 };

// Viewing geometry for spatial adaptation. The scale factor is 1/2 for 1080
// lines viewed at 3 display heights and shrinks with pixels per degree.
struct ViewingConfig {
  double distance_heights = 3.0;
  double reference_lines = 1080.0;
};

double SastFactor(const ViewingConfig& viewing, int height);
RealPlane SastRescale(const RealPlane& plane, double factor);
ComplexPlane SastRescale(const ComplexPlane& plane, double factor);
pucolor::PUFrame SastRescale(const pucolor::PUFrame& frame, double factor);

template <typename T>
struct Subbands {
  std::array<Plane<T>, 4> band;  // indexed by Band

  Plane<T>& operator[](Band b) { return band[b]; }
  const Plane<T>& operator[](Band b) const { return band[b]; }
};

// Orthonormal Haar decomposition. Subbands live on the mirror-padded frame;
// LevelWidth/LevelHeight give the extent covering the unpadded frame.
template <typename T>
struct Pyramid {
  int width = 0;
  int height = 0;
  std::vector<Subbands<T>> levels;  // levels[0] is level 1

  int num_levels() const { return static_cast<int>(levels.size()); }
  const Subbands<T>& level(int lambda) const { return levels[lambda - 1]; }
  Subbands<T>& level(int lambda) { return levels[lambda - 1]; }
  int LevelWidth(int lambda) const { return (width + (1 << lambda) - 1) >> lambda; }
  int LevelHeight(int lambda) const { return (height + (1 << lambda) - 1) >> lambda; }
};

using RealPyramid = Pyramid<double>;
using ComplexPyramid = Pyramid<std::complex<double>>;

template <typename T>
Pyramid<T> HaarAnalyze(const Plane<T>& plane, int levels = kLevels);

// Coefficient-wise a - b (Haar is linear, so this is the pyramid of the
// frame difference).
template <typename T>
Pyramid<T> Difference(const Pyramid<T>& a, const Pyramid<T>& b);

enum class ChannelClass { kAchromatic = 0, kRedGreen = 1, kBlueYellow = 2 };

// Subband sensitivity weights per (channel class, level, orientation). The A
// weight is only used at the deepest level.
class CsfWeights {
 public:
  static CsfWeights Ones();
  // Fixture format: {"entries": [{"channel": "achromatic", "level": 1,
  // "orientation": "H", "weight": 0.5}, ...]}. Every H/V/D entry for levels
  // 1..4 and the level-4 A entry must be present for each channel.
  static CsfWeights FromJson(const nlohmann::json& j);
  static CsfWeights Load(const std::filesystem::path& path);
  nlohmann::json ToJson() const;

  double at(ChannelClass channel, int level, Band band) const;
  void set(ChannelClass channel, int level, Band band, double weight);

 private:
  std::array<std::array<std::array<double, 4>, kLevels>, 3> w_{};
};

RealPyramid ApplyCsf(RealPyramid pyramid, const CsfWeights& weights, ChannelClass channel);
// Real parts take red-green weights, imaginary parts blue-yellow weights.
ComplexPyramid ApplyCsf(ComplexPyramid pyramid, const CsfWeights& weights);

template <typename T>
struct ScaleMoments {
  Plane<T> mu_x, mu_y;
  RealPlane var_x, var_y;
  Plane<T> cov;  // E[x conj(y)] - mu_x conj(mu_y)
};

template <typename T>
struct MomentPyramid {
  std::vector<ScaleMoments<T>> scales;  // scales[0] is scale 1 (2x2 windows)

  const ScaleMoments<T>& scale(int lambda) const { return scales[lambda - 1]; }
  int num_scales() const { return static_cast<int>(scales.size()); }
};

using RealMoments = MomentPyramid<double>;
using ComplexMoments = MomentPyramid<std::complex<double>>;

// Non-overlapping 2^λ windows via the iterative variance recursion, cropped to
// the level extent of the unpadded frame.
template <typename T>
MomentPyramid<T> BuildMoments(const Pyramid<T>& ref, const Pyramid<T>& test);

inline double Conj(double v) { return v; }
inline std::complex<double> Conj(std::complex<double> v) { return std::conj(v); }
inline double Norm(double v) { return v * v; }
inline double Norm(std::complex<double> v) { return std::norm(v); }

}  // namespace cutfunque::wavelet

#endif  // CUTFUNQUE_WAVELET_H_
