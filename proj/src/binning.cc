#include "cutfunque/binning.h"

#include <algorithm>
#include <cmath>

namespace cutfunque::binning {

double BinConfig::Center(Measure m, int bin) const {
  const Domain& d = domain(m);
  return d.lo + (2 * bin + 1) * (d.hi - d.lo) / (2 * kBins);
}

double BinConfig::Width(Measure m) const {
  const Domain& d = domain(m);
  return (d.hi - d.lo) / kBins;
}

int CutSize(int lambda) { return 1 << (lambda + 2); }

namespace {

template <typename F>
RealPlane ForEachCut(int width, int height, int lambda, F f) {
  const int cut = CutSize(lambda);
  const int gw = (width + cut - 1) / cut, gh = (height + cut - 1) / cut;
  RealPlane out(gw, gh);
  for (int cy = 0; cy < gh; ++cy)
    for (int cx = 0; cx < gw; ++cx)
      out(cx, cy) = f(cx * cut, cy * cut, std::min(cut, width - cx * cut), std::min(cut, height - cy * cut));
  return out;
}

}  // namespace

void SpatialMeasures(const RealPlane& luma, int lambda, CutMeasures& out) {
  out.l = ForEachCut(luma.width(), luma.height(), lambda, [&](int x0, int y0, int w, int h) {
    double sum = 0;
    for (int y = y0; y < y0 + h; ++y)
      for (int x = x0; x < x0 + w; ++x) sum += luma(x, y);
    return sum / (w * h);
  });
  out.s = ForEachCut(luma.width(), luma.height(), lambda, [&](int x0, int y0, int w, int h) {
    const double mean = out.l(x0 / CutSize(lambda), y0 / CutSize(lambda));
    double sq = 0;
    for (int y = y0; y < y0 + h; ++y)
      for (int x = x0; x < x0 + w; ++x) sq += (luma(x, y) - mean) * (luma(x, y) - mean);
    return std::min(std::sqrt(sq / (w * h)) / std::max(mean, kMeanFloor), 1.0);
  });
}

void TemporalMeasure(std::span<const RealPlane* const> frames, int lambda, CutMeasures& out) {
  const RealPlane& current = *frames.back();
  const double n = static_cast<double>(frames.size());
  out.t = ForEachCut(current.width(), current.height(), lambda, [&](int x0, int y0, int w, int h) {
    double std_sum = 0, mean_sum = 0;
    for (int y = y0; y < y0 + h; ++y)
      for (int x = x0; x < x0 + w; ++x) {
        double s = 0;
        for (const RealPlane* f : frames) s += (*f)(x, y);
        const double mean = s / n;
        double v = 0;
        for (const RealPlane* f : frames) v += ((*f)(x, y) - mean) * ((*f)(x, y) - mean);
        std_sum += std::sqrt(v / n);
        mean_sum += mean;
      }
    return std::min(std_sum / std::max(mean_sum / (w * h), kMeanFloor) / (w * h), 1.0);
  });
}

double Membership(double measure, const BinConfig& cfg, Measure type, int bin) {
  const Domain& d = cfg.domain(type);
  const double m = std::clamp(measure, d.lo, d.hi);
  const double half = cfg.Width(type) / 2;
  const double z = (m - cfg.Center(type, bin)) / half;
  return std::exp(-0.5 * z * z);
}

RealPlane MembershipPlane(const RealPlane& measures, const BinConfig& cfg, Measure type, int bin) {
  RealPlane out(measures.width(), measures.height());
  auto src = measures.data();
  auto dst = out.data();
  for (size_t i = 0; i < src.size(); ++i) dst[i] = Membership(src[i], cfg, type, bin);
  return out;
}

std::optional<double> Aggregate(const RealPlane& map, const RealPlane& weights, bool minkowski) {
  auto m = map.data();
  auto w = weights.data();
  double total = 0, acc = 0;
  for (size_t i = 0; i < m.size(); ++i) {
    total += w[i];
    if (minkowski) {
      const double d = 1.0 - m[i];
      acc += w[i] * d * d * d;
    } else {
      acc += w[i] * m[i];
    }
  }
  if (total < kEmptyWeight) return std::nullopt;
  return minkowski ? 1.0 - std::cbrt(acc / total) : acc / total;
}

double UnweightedMean(const RealPlane& map) {
  double s = 0;
  for (double v : map.data()) s += v;
  return s / static_cast<double>(map.size());
}

std::optional<double> WorstBin(std::span<const std::optional<double>> bins, bool distortion) {
  std::optional<double> worst;
  for (const auto& v : bins) {
    if (!v) continue;
    if (!worst || (distortion ? *v > *worst : *v < *worst)) worst = v;
  }
  return worst;
}

std::optional<double> FuseScales(std::span<const std::optional<double>> values, std::span<const double> weights) {
  double num = 0, den = 0;
  for (size_t s = 0; s < values.size(); ++s) {
    if (!values[s]) continue;
    num += weights[s] * *values[s];
    den += weights[s];
  }
  if (den == 0) return std::nullopt;
  return num / den;
}

}  // namespace cutfunque::binning
