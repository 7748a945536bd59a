#include "cutfunque/wavelet.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "cutfunque/error.h"

namespace cutfunque::wavelet {
namespace {

int RoundUp(int v, int multiple) { return (v + multiple - 1) / multiple * multiple; }

const char* ChannelName(int c) {
  static const char* kNames[3] = {"achromatic", "red-green", "blue-yellow"};
  return kNames[c];
}

const char* BandName(int b) {
  static const char* kNames[4] = {"A", "H", "V", "D"};
  return kNames[b];
}

bool Required(int level, int band) { return band != kA || level == kLevels; }

template <typename T>
Plane<T> Scaled(Plane<T> p, double w) {
  for (auto& v : p.data()) v *= w;
  return p;
}

template <typename T>
void WeightPyramid(Pyramid<T>& pyramid, auto weight_of) {
  const int deepest = pyramid.num_levels();
  for (int lambda = 1; lambda <= deepest; ++lambda) {
    auto& level = pyramid.level(lambda);
    for (int b = kH; b <= kD; ++b) weight_of(level.band[b], lambda, static_cast<Band>(b));
    if (lambda == deepest) weight_of(level.band[kA], lambda, kA);
  }
}

}  // namespace

double SastFactor(const ViewingConfig& viewing, int height) {
  if (!(viewing.distance_heights > 0)) throw ConfigError("wavelet", "viewing distance must be positive");
  const double f = 0.5 * (3.0 / viewing.distance_heights) * (viewing.reference_lines / height);
  return std::clamp(f, 1e-6, 1.0);
}

namespace {
std::pair<int, int> SastDims(int w, int h, double factor) {
  if (!(factor > 0) || factor > 1) throw ConfigError("wavelet", "SAST factor must lie in (0, 1]");
  return {std::max(1, static_cast<int>(std::lround(w * factor))),
          std::max(1, static_cast<int>(std::lround(h * factor)))};
}
}  // namespace

RealPlane SastRescale(const RealPlane& plane, double factor) {
  const auto [w, h] = SastDims(plane.width(), plane.height(), factor);
  return ResizeBilinear(plane, w, h);
}

ComplexPlane SastRescale(const ComplexPlane& plane, double factor) {
  return MakeComplex(SastRescale(RealPart(plane), factor), SastRescale(ImagPart(plane), factor));
}

pucolor::PUFrame SastRescale(const pucolor::PUFrame& frame, double factor) {
  return {SastRescale(frame.luma, factor), SastRescale(frame.chroma, factor)};
}

template <typename T>
Pyramid<T> HaarAnalyze(const Plane<T>& plane, int levels) {
  Pyramid<T> out;
  out.width = plane.width();
  out.height = plane.height();
  const int multiple = std::max(kPadMultiple, 1 << levels);
  Plane<T> current = PadMirror(plane, RoundUp(plane.width(), multiple), RoundUp(plane.height(), multiple));
  for (int lambda = 1; lambda <= levels; ++lambda) {
    const int w = current.width() / 2, h = current.height() / 2;
    Subbands<T> s;
    for (auto& b : s.band) b = Plane<T>(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const T a = current(2 * x, 2 * y), b = current(2 * x + 1, 2 * y);
        const T c = current(2 * x, 2 * y + 1), d = current(2 * x + 1, 2 * y + 1);
        s.band[kA](x, y) = (a + b + c + d) * 0.5;
        s.band[kH](x, y) = (a + b - c - d) * 0.5;
        s.band[kV](x, y) = (a - b + c - d) * 0.5;
        s.band[kD](x, y) = (a - b - c + d) * 0.5;
      }
    }
    current = s.band[kA];
    out.levels.push_back(std::move(s));
  }
  return out;
}

template <typename T>
Pyramid<T> Difference(const Pyramid<T>& a, const Pyramid<T>& b) {
  Pyramid<T> out = a;
  for (size_t l = 0; l < out.levels.size(); ++l) {
    for (int band = 0; band < 4; ++band) {
      auto dst = out.levels[l].band[band].data();
      auto src = b.levels[l].band[band].data();
      for (size_t i = 0; i < dst.size(); ++i) dst[i] -= src[i];
    }
  }
  return out;
}

CsfWeights CsfWeights::Ones() {
  CsfWeights w;
  for (auto& c : w.w_)
    for (auto& l : c) l.fill(1.0);
  return w;
}

CsfWeights CsfWeights::FromJson(const nlohmann::json& j) {
  CsfWeights out;
  std::array<std::array<std::array<bool, 4>, kLevels>, 3> seen{};
  for (const auto& e : j.at("entries")) {
    const std::string channel = e.at("channel").get<std::string>();
    const std::string orientation = e.at("orientation").get<std::string>();
    const int level = e.at("level").get<int>();
    const double weight = e.at("weight").get<double>();
    int c = 0, b = 0;
    while (c < 3 && channel != ChannelName(c)) ++c;
    while (b < 4 && orientation != BandName(b)) ++b;
    if (c == 3) throw ConfigError("wavelet", "unknown CSF channel '" + channel + "'");
    if (b == 4) throw ConfigError("wavelet", "unknown CSF orientation '" + orientation + "'");
    if (level < 1 || level > kLevels) throw ConfigError("wavelet", "CSF level out of range: " + std::to_string(level));
    if (!(weight > 0) || !std::isfinite(weight)) throw ConfigError("wavelet", "CSF weights must be positive");
    out.w_[c][level - 1][b] = weight;
    seen[c][level - 1][b] = true;
  }
  for (int c = 0; c < 3; ++c)
    for (int l = 1; l <= kLevels; ++l)
      for (int b = 0; b < 4; ++b)
        if (Required(l, b) && !seen[c][l - 1][b])
          throw ConfigError("wavelet", std::string("missing CSF weight for ") + ChannelName(c) + " level " +
                                           std::to_string(l) + " " + BandName(b));
  return out;
}

CsfWeights CsfWeights::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("wavelet", "cannot open CSF weights " + path.string());
  try {
    return FromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("wavelet", "malformed CSF weights " + path.string() + ": " + e.what());
  }
}

nlohmann::json CsfWeights::ToJson() const {
  nlohmann::json entries = nlohmann::json::array();
  for (int c = 0; c < 3; ++c)
    for (int l = 1; l <= kLevels; ++l)
      for (int b = 0; b < 4; ++b)
        if (Required(l, b))
          entries.push_back({{"channel", ChannelName(c)},
                             {"level", l},
                             {"orientation", BandName(b)},
                             {"weight", w_[c][l - 1][b]}});
  return {{"entries", entries}};
}

double CsfWeights::at(ChannelClass channel, int level, Band band) const {
  return w_[static_cast<int>(channel)][level - 1][band];
}

void CsfWeights::set(ChannelClass channel, int level, Band band, double weight) {
  w_[static_cast<int>(channel)][level - 1][band] = weight;
}

RealPyramid ApplyCsf(RealPyramid pyramid, const CsfWeights& weights, ChannelClass channel) {
  WeightPyramid(pyramid, [&](RealPlane& p, int lambda, Band b) {
    const double w = weights.at(channel, lambda, b);
    for (double& v : p.data()) v *= w;
  });
  return pyramid;
}

ComplexPyramid ApplyCsf(ComplexPyramid pyramid, const CsfWeights& weights) {
  WeightPyramid(pyramid, [&](ComplexPlane& p, int lambda, Band b) {
    const double wr = weights.at(ChannelClass::kRedGreen, lambda, b);
    const double wi = weights.at(ChannelClass::kBlueYellow, lambda, b);
    for (auto& v : p.data()) v = {v.real() * wr, v.imag() * wi};
  });
  return pyramid;
}

template <typename T>
MomentPyramid<T> BuildMoments(const Pyramid<T>& ref, const Pyramid<T>& test) {
  if (ref.width != test.width || ref.height != test.height || ref.num_levels() != test.num_levels())
    throw ConfigError("wavelet", "reference and test pyramids differ in shape");
  MomentPyramid<T> out;
  RealPlane var_x, var_y;
  Plane<T> cov;
  for (int lambda = 1; lambda <= ref.num_levels(); ++lambda) {
    const auto& xs = ref.level(lambda);
    const auto& ys = test.level(lambda);
    const int w = xs[kA].width(), h = xs[kA].height();
    const double detail_scale = std::ldexp(1.0, -2 * lambda);
    RealPlane vx(w, h), vy(w, h);
    Plane<T> c(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double ex = 0, ey = 0;
        T exy{};
        for (int b = kH; b <= kD; ++b) {
          const T xv = xs.band[b](x, y), yv = ys.band[b](x, y);
          ex += Norm(xv);
          ey += Norm(yv);
          exy += xv * Conj(yv);
        }
        ex *= detail_scale;
        ey *= detail_scale;
        exy *= detail_scale;
        if (lambda > 1) {
          for (int dy = 0; dy < 2; ++dy) {
            for (int dx = 0; dx < 2; ++dx) {
              ex += 0.25 * var_x(2 * x + dx, 2 * y + dy);
              ey += 0.25 * var_y(2 * x + dx, 2 * y + dy);
              exy += cov(2 * x + dx, 2 * y + dy) * 0.25;
            }
          }
        }
        vx(x, y) = ex;
        vy(x, y) = ey;
        c(x, y) = exy;
      }
    }
    var_x = std::move(vx);
    var_y = std::move(vy);
    cov = std::move(c);

    const double mu_scale = std::ldexp(1.0, -lambda);
    const int cw = ref.LevelWidth(lambda), ch = ref.LevelHeight(lambda);
    ScaleMoments<T> m;
    m.mu_x = Crop(Scaled(xs[kA], mu_scale), cw, ch);
    m.mu_y = Crop(Scaled(ys[kA], mu_scale), cw, ch);
    m.var_x = Crop(var_x, cw, ch);
    m.var_y = Crop(var_y, cw, ch);
    m.cov = Crop(cov, cw, ch);
    out.scales.push_back(std::move(m));
  }
  return out;
}

template Pyramid<double> HaarAnalyze(const Plane<double>&, int);
template Pyramid<std::complex<double>> HaarAnalyze(const Plane<std::complex<double>>&, int);
template Pyramid<double> Difference(const Pyramid<double>&, const Pyramid<double>&);
template Pyramid<std::complex<double>> Difference(const Pyramid<std::complex<double>>&,
                                                  const Pyramid<std::complex<double>>&);
template MomentPyramid<double> BuildMoments(const Pyramid<double>&, const Pyramid<double>&);
template MomentPyramid<std::complex<double>> BuildMoments(const Pyramid<std::complex<double>>&,
                                                          const Pyramid<std::complex<double>>&);

}  // namespace cutfunque::wavelet
