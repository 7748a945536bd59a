#include "cutfunque/wavelet_features.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cutfunque::features {
namespace {

using wavelet::kD;
using wavelet::kH;
using wavelet::kV;
using Complex = std::complex<double>;

template <typename F>
RealPlane Map(int w, int h, F f) {
  RealPlane out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out(x, y) = f(x, y);
  return out;
}

double Angle(double v, double h) {
  if (h == 0.0) return v == 0.0 ? 0.0 : std::copysign(std::numbers::pi / 2, v);
  return std::atan(v / h);
}

}  // namespace

std::string_view MapName(MapId id) {
  static constexpr std::string_view kNames[kNumMaps] = {
      "L-SSIM_mu", "L-SSIM_sigma", "C-SSIM_mu", "C-SSIM_sigma", "L-VIF",   "C-VIF", "L-TVIF",
      "C-TVIF",    "L-SRRED",      "L-TRRED",   "C-SRRED",      "C-TRRED", "DLM"};
  return kNames[static_cast<int>(id)];
}

bool IsSsimFamily(MapId id) { return static_cast<int>(id) <= static_cast<int>(MapId::kCSsimSigma); }

bool IsDistortion(MapId id) {
  return id == MapId::kLSRred || id == MapId::kLTRred || id == MapId::kCSRred || id == MapId::kCTRred;
}

bool IsTemporal(MapId id) {
  return id == MapId::kLTVif || id == MapId::kCTVif || id == MapId::kLTRred || id == MapId::kCTRred;
}

RealPlane SsimMuWindows(const wavelet::ScaleMoments<double>& m) {
  return Map(m.mu_x.width(), m.mu_x.height(), [&](int x, int y) {
    const double a = m.mu_x(x, y), b = m.mu_y(x, y);
    return (2 * a * b + kC1) / (a * a + b * b + kC1);
  });
}

RealPlane SsimSigmaWindows(const wavelet::ScaleMoments<double>& m) {
  return Map(m.cov.width(), m.cov.height(), [&](int x, int y) {
    return (2 * m.cov(x, y) + kC2) / (m.var_x(x, y) + m.var_y(x, y) + kC2);
  });
}

RealPlane SsimMuWindows(const wavelet::ScaleMoments<Complex>& m) {
  return Map(m.mu_x.width(), m.mu_x.height(), [&](int x, int y) {
    const Complex a = m.mu_x(x, y), b = m.mu_y(x, y);
    return (2 * std::abs(a * b) + kC1) / (std::norm(a) + std::norm(b) + kC1);
  });
}

RealPlane SsimSigmaWindows(const wavelet::ScaleMoments<Complex>& m) {
  return Map(m.cov.width(), m.cov.height(), [&](int x, int y) {
    return (2 * std::abs(m.cov(x, y)) + kC2) / (m.var_x(x, y) + m.var_y(x, y) + kC2);
  });
}

double VifValue(double var_x, double var_y, double cov_norm, double noise_var) {
  if (var_x < kVarianceFloor) return var_y < kVarianceFloor ? 1.0 : 0.0;
  const double g2 = cov_norm / (var_x * var_x);
  const double var_v = std::max(var_y - cov_norm / var_x, 0.0);
  const double mi_test = std::log1p(g2 * var_x / (var_v + noise_var));
  const double mi_ref = std::log1p(var_x / noise_var);
  return mi_test / mi_ref;
}

RealPlane VifWindows(const wavelet::ScaleMoments<double>& m, const VifConfig& cfg) {
  return Map(m.cov.width(), m.cov.height(), [&](int x, int y) {
    const double c = m.cov(x, y);
    return VifValue(m.var_x(x, y), m.var_y(x, y), c * c, cfg.noise_var);
  });
}

RealPlane VifWindows(const wavelet::ScaleMoments<Complex>& m, const VifConfig& cfg) {
  return Map(m.cov.width(), m.cov.height(), [&](int x, int y) {
    return VifValue(m.var_x(x, y), m.var_y(x, y), std::norm(m.cov(x, y)), cfg.noise_var);
  });
}

double RredEntropy(double var, double noise_var) {
  return std::log1p(var) * std::log(2 * std::numbers::pi * std::numbers::e * (var + noise_var));
}

RealPlane RredWindows(const RealPlane& var_ref, const RealPlane& var_test, const VifConfig& cfg) {
  return Map(var_ref.width(), var_ref.height(), [&](int x, int y) {
    return std::abs(RredEntropy(var_ref(x, y), cfg.noise_var) - RredEntropy(var_test(x, y), cfg.noise_var));
  });
}

RealPlane ReduceToCuts(const RealPlane& windows) {
  const int w = (windows.width() + kCutWindows - 1) / kCutWindows;
  const int h = (windows.height() + kCutWindows - 1) / kCutWindows;
  return Map(w, h, [&](int cx, int cy) {
    double sum = 0;
    int count = 0;
    for (int y = cy * kCutWindows; y < std::min((cy + 1) * kCutWindows, windows.height()); ++y)
      for (int x = cx * kCutWindows; x < std::min((cx + 1) * kCutWindows, windows.width()); ++x) {
        sum += windows(x, y);
        ++count;
      }
    return sum / count;
  });
}

int CutGridWidth(int frame_width, int lambda) {
  const int cut = 1 << (lambda + 2);
  return (frame_width + cut - 1) / cut;
}

int CutGridHeight(int frame_height, int lambda) {
  const int cut = 1 << (lambda + 2);
  return (frame_height + cut - 1) / cut;
}

RealPlane DlmCuts(const wavelet::RealPyramid& ref, const wavelet::RealPyramid& test, int lambda) {
  const auto& xs = ref.level(lambda);
  const auto& ys = test.level(lambda);
  const int pw = xs[kH].width(), ph = xs[kH].height();

  // Restored and additive components for the whole padded level.
  std::array<RealPlane, 3> restored, additive;
  for (int t = 0; t < 3; ++t) {
    restored[t] = RealPlane(pw, ph);
    additive[t] = RealPlane(pw, ph);
  }
  for (int y = 0; y < ph; ++y) {
    for (int x = 0; x < pw; ++x) {
      const double psi_x = Angle(xs[kV](x, y), xs[kH](x, y));
      const double psi_y = Angle(ys[kV](x, y), ys[kH](x, y));
      const bool aligned = std::abs(psi_x - psi_y) < std::numbers::pi / 180.0;
      for (int t = 0; t < 3; ++t) {
        const auto band = static_cast<wavelet::Band>(kH + t);
        const double xv = xs[band](x, y), yv = ys[band](x, y);
        double gain = xv == 0.0 ? 0.0 : yv / xv;
        if (!aligned) gain = std::clamp(gain, 0.0, 1.0);
        restored[t](x, y) = gain * xv;
        additive[t](x, y) = yv - restored[t](x, y);
      }
    }
  }

  const int lw = ref.LevelWidth(lambda), lh = ref.LevelHeight(lambda);
  const int gw = (lw + kCutWindows - 1) / kCutWindows, gh = (lh + kCutWindows - 1) / kCutWindows;
  RealPlane num(gw, gh), den(gw, gh);
  for (int y = 0; y < lh; ++y) {
    for (int x = 0; x < lw; ++x) {
      double mask = 0;
      for (int t = 0; t < 3; ++t)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const double w = (dx == 0 && dy == 0) ? 2.0 / 30.0 : 1.0 / 30.0;
            mask += w * std::abs(additive[t](MirrorIndex(x + dx, pw), MirrorIndex(y + dy, ph)));
          }
      for (int t = 0; t < 3; ++t) {
        const auto band = static_cast<wavelet::Band>(kH + t);
        const double r = std::max(std::abs(restored[t](x, y)) - mask, 0.0);
        const double xv = std::abs(xs[band](x, y));
        num(x / kCutWindows, y / kCutWindows) += r * r * r;
        den(x / kCutWindows, y / kCutWindows) += xv * xv * xv;
      }
    }
  }
  return Map(gw, gh, [&](int x, int y) {
    return den(x, y) > 0 ? std::cbrt(num(x, y)) / std::cbrt(den(x, y)) : 1.0;
  });
}

namespace {

void Put(QualityMaps& maps, int lambda, MapId id, RealPlane windows) {
  maps[lambda - 1][static_cast<int>(id)] = ReduceToCuts(windows);
}

}  // namespace

void SpatialMaps(const ChannelPyramids& ref, const ChannelPyramids& test, const VifConfig& cfg,
                 QualityMaps& maps) {
  const auto luma = wavelet::BuildMoments(ref.luma, test.luma);
  const auto chroma = wavelet::BuildMoments(ref.chroma, test.chroma);
  for (int lambda = 1; lambda <= kScales; ++lambda) {
    const auto& l = luma.scale(lambda);
    const auto& c = chroma.scale(lambda);
    Put(maps, lambda, MapId::kLSsimMu, SsimMuWindows(l));
    Put(maps, lambda, MapId::kLSsimSigma, SsimSigmaWindows(l));
    Put(maps, lambda, MapId::kCSsimMu, SsimMuWindows(c));
    Put(maps, lambda, MapId::kCSsimSigma, SsimSigmaWindows(c));
    Put(maps, lambda, MapId::kLVif, VifWindows(l, cfg));
    Put(maps, lambda, MapId::kCVif, VifWindows(c, cfg));
    Put(maps, lambda, MapId::kLSRred, RredWindows(l.var_x, l.var_y, cfg));
    Put(maps, lambda, MapId::kCSRred, RredWindows(c.var_x, c.var_y, cfg));
    maps[lambda - 1][static_cast<int>(MapId::kDlm)] = DlmCuts(ref.luma, test.luma, lambda);
  }
}

void TemporalMaps(const ChannelPyramids& ref, const ChannelPyramids& ref_prev,
                  const ChannelPyramids& test, const ChannelPyramids& test_prev, const VifConfig& cfg,
                  QualityMaps& maps) {
  const auto luma = wavelet::BuildMoments(wavelet::Difference(ref.luma, ref_prev.luma),
                                          wavelet::Difference(test.luma, test_prev.luma));
  const auto chroma = wavelet::BuildMoments(wavelet::Difference(ref.chroma, ref_prev.chroma),
                                            wavelet::Difference(test.chroma, test_prev.chroma));
  for (int lambda = 1; lambda <= kScales; ++lambda) {
    const auto& l = luma.scale(lambda);
    const auto& c = chroma.scale(lambda);
    Put(maps, lambda, MapId::kLTVif, VifWindows(l, cfg));
    Put(maps, lambda, MapId::kCTVif, VifWindows(c, cfg));
    Put(maps, lambda, MapId::kLTRred, RredWindows(l.var_x, l.var_y, cfg));
    Put(maps, lambda, MapId::kCTRred, RredWindows(c.var_x, c.var_y, cfg));
  }
}

}  // namespace cutfunque::features
