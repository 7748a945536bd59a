#include "cutfunque/nss.h"

#include <algorithm>
#include <cmath>

#include "cutfunque/error.h"

namespace cutfunque::nss {
namespace {

// log of Γ(1/α)Γ(3/α)/Γ(2/α)²; decreasing in α.
double LogGgdRatio(double alpha) {
  return std::lgamma(1.0 / alpha) + std::lgamma(3.0 / alpha) - 2.0 * std::lgamma(2.0 / alpha);
}

void CheckSamples(std::span<const double> samples) {
  if (static_cast<int>(samples.size()) < kMinSamples)
    throw FitError("fit needs at least " + std::to_string(kMinSamples) + " samples, got " +
                   std::to_string(samples.size()));
}

double ScaleFromVariance(double mean_sq, double alpha) {
  return std::sqrt(mean_sq * std::exp(std::lgamma(1.0 / alpha) - std::lgamma(3.0 / alpha)));
}

std::pair<int, int> Offset(Direction d) {
  switch (d) {
    case Direction::kH:
      return {1, 0};
    case Direction::kV:
      return {0, 1};
    case Direction::kD1:
      return {1, 1};
    case Direction::kD2:
      return {1, -1};
  }
  return {0, 0};
}

}  // namespace

RealPlane GaussianBlur(const RealPlane& in, int window, double sigma) {
  const int r = window / 2;
  std::vector<double> k(window);
  double total = 0;
  for (int i = -r; i <= r; ++i) total += k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& v : k) v /= total;
  const int w = in.width(), h = in.height();
  RealPlane tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * in(MirrorIndex(x + i, w), y);
      tmp(x, y) = s;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * tmp(x, MirrorIndex(y + i, h));
      out(x, y) = s;
    }
  return out;
}

namespace {

void Normalize(const RealPlane& in, const MscnConfig& cfg, RealPlane& mscn, RealPlane& sigma) {
  const RealPlane mu = GaussianBlur(in, cfg.window, cfg.sigma);
  RealPlane sq(in.width(), in.height());
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x) sq(x, y) = in(x, y) * in(x, y);
  const RealPlane mu_sq = GaussianBlur(sq, cfg.window, cfg.sigma);
  mscn = RealPlane(in.width(), in.height());
  sigma = RealPlane(in.width(), in.height());
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x) {
      const double m = mu(x, y);
      const double s = std::sqrt(std::max(mu_sq(x, y) - m * m, 0.0));
      sigma(x, y) = s;
      mscn(x, y) = (in(x, y) - m) / (s + cfg.epsilon);
    }
}

}  // namespace

MscnPlanes Mscn(const RealPlane& plane, const MscnConfig& cfg) {
  MscnPlanes out;
  Normalize(plane, cfg, out.mscn, out.sigma);
  RealPlane unused;
  Normalize(out.sigma, cfg, out.sigma_mscn, unused);
  return out;
}

void AppendProducts(const RealPlane& mscn, Direction d, int x0, int y0, int w, int h,
                    std::vector<double>& out) {
  const auto [dx, dy] = Offset(d);
  for (int y = y0; y < y0 + h; ++y) {
    const int ny = y + dy;
    if (ny < y0 || ny >= y0 + h) continue;
    for (int x = x0; x + dx < x0 + w; ++x) out.push_back(mscn(x, y) * mscn(x + dx, ny));
  }
}

std::vector<double> Products(const RealPlane& mscn, Direction d) {
  std::vector<double> out;
  AppendProducts(mscn, d, 0, 0, mscn.width(), mscn.height(), out);
  return out;
}

double InvertGgdRatio(double ratio) {
  const double target = std::log(ratio);
  double lo = kMinShape, hi = kMaxShape;
  if (target >= LogGgdRatio(lo)) return lo;
  if (target <= LogGgdRatio(hi)) return hi;
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (LogGgdRatio(mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

GgdParams FitGgd(std::span<const double> samples) {
  CheckSamples(samples);
  double abs_sum = 0, sq_sum = 0;
  for (double v : samples) {
    abs_sum += std::abs(v);
    sq_sum += v * v;
  }
  const double n = static_cast<double>(samples.size());
  const double mean_abs = abs_sum / n, mean_sq = sq_sum / n;
  if (mean_sq < kMinEnergy) throw FitError("degenerate samples (near-zero energy)");
  const double alpha = InvertGgdRatio(mean_sq / (mean_abs * mean_abs));
  return {alpha, ScaleFromVariance(mean_sq, alpha)};
}

AggdParams FitAggd(std::span<const double> samples) {
  CheckSamples(samples);
  double left_sq = 0, right_sq = 0, abs_sum = 0;
  size_t left_n = 0, right_n = 0;
  for (double v : samples) {
    abs_sum += std::abs(v);
    if (v < 0) {
      left_sq += v * v;
      ++left_n;
    } else {
      right_sq += v * v;
      ++right_n;
    }
  }
  const double n = static_cast<double>(samples.size());
  const double mean_sq = (left_sq + right_sq) / n;
  if (mean_sq < kMinEnergy) throw FitError("degenerate samples (near-zero energy)");
  const double sigma_l = left_n ? std::sqrt(left_sq / left_n) : 0.0;
  const double sigma_r = right_n ? std::sqrt(right_sq / right_n) : 0.0;
  const double mean_abs = abs_sum / n;
  const double r_hat = mean_abs * mean_abs / mean_sq;
  double ratio = r_hat;
  if (sigma_r > 0) {
    const double g = sigma_l / sigma_r;
    ratio = r_hat * (g * g * g + 1) * (g + 1) / ((g * g + 1) * (g * g + 1));
  }
  // ratio estimates Γ(2/α)²/(Γ(1/α)Γ(3/α)).
  const double alpha = InvertGgdRatio(1.0 / ratio);
  const double k = std::sqrt(std::exp(std::lgamma(1.0 / alpha) - std::lgamma(3.0 / alpha)));
  return {alpha, std::max(sigma_l * k, kMinScale), std::max(sigma_r * k, kMinScale)};
}

GgdParams FitGgdOrFallback(std::span<const double> samples) {
  try {
    return FitGgd(samples);
  } catch (const FitError&) {
    return {};
  }
}

AggdParams FitAggdOrFallback(std::span<const double> samples) {
  try {
    return FitAggd(samples);
  } catch (const FitError&) {
    return {};
  }
}

double Fosd(const GgdParams& p1, const GgdParams& p2) {
  const double a1 = p1.alpha, a2 = p2.alpha;
  const double first =
      std::exp(std::lgamma((a2 + 1) / a1) - std::lgamma(1 / a1) + a2 * std::log(p1.b / p2.b));
  const double log_term = std::log(a1 / a2) + std::log(p2.b / p1.b) + std::lgamma(1 / a2) - std::lgamma(1 / a1);
  return std::max(first - 1 / a1 + log_term, 0.0);
}

double Sosd(const AggdParams& p1, const AggdParams& p2) {
  const double a1 = p1.alpha, a2 = p2.alpha;
  const double s1 = p1.b_l + p1.b_r, s2 = p2.b_l + p2.b_r;
  const double sides = p1.b_l * std::exp(a2 * std::log(p1.b_l / p2.b_l)) +
                       p1.b_r * std::exp(a2 * std::log(p1.b_r / p2.b_r));
  const double first = std::exp(std::lgamma((a2 + 1) / a1) - std::lgamma(1 / a1)) * sides / s1;
  const double log_term = std::log(a1 / a2) + std::log(s2 / s1) + std::lgamma(1 / a2) - std::lgamma(1 / a1);
  return std::max(first - 1 / a1 + log_term, 0.0);
}

AggdParams Average(std::span<const AggdParams> params) {
  AggdParams out{0, 0, 0};
  for (const auto& p : params) {
    out.alpha += p.alpha;
    out.b_l += p.b_l;
    out.b_r += p.b_r;
  }
  const double n = static_cast<double>(params.size());
  return {out.alpha / n, out.b_l / n, out.b_r / n};
}

std::array<double, kGlobalFeatures> GlobalNss(const RealPlane& luma, const MscnConfig& cfg) {
  const MscnPlanes planes = Mscn(luma, cfg);
  const GgdParams first = FitGgdOrFallback(planes.mscn.data());
  const GgdParams sigma = FitGgdOrFallback(planes.sigma_mscn.data());
  std::array<AggdParams, 4> directional;
  for (int d = 0; d < 4; ++d) directional[d] = FitAggdOrFallback(Products(planes.mscn, kDirections[d]));
  const AggdParams second = Average(directional);
  return {first.alpha, first.b, sigma.alpha, sigma.b, second.alpha, second.b_l, second.b_r};
}

double GlobalFosd(const RealPlane& ref_luma, const RealPlane& test_luma, const MscnConfig& cfg) {
  const auto ref = FitGgdOrFallback(Mscn(ref_luma, cfg).mscn.data());
  const auto test = FitGgdOrFallback(Mscn(test_luma, cfg).mscn.data());
  return Fosd(ref, test);
}

int CutOrigin(int index, int cut, int extent) {
  return std::max(0, std::min(index * cut, extent - cut));
}

namespace {

struct CutFits {
  GgdParams ggd;
  AggdParams aggd;
  bool ggd_ok = true;
  bool aggd_ok = true;
};

CutFits FitCut(const RealPlane& mscn, int x0, int y0, int w, int h, int lambda) {
  CutFits out;
  std::vector<double> samples;
  samples.reserve(static_cast<size_t>(w) * h);
  for (int y = y0; y < y0 + h; ++y)
    for (int x = x0; x < x0 + w; ++x) samples.push_back(mscn(x, y));
  try {
    out.ggd = FitGgd(samples);
  } catch (const FitError&) {
    out.ggd_ok = false;
  }
  if (PoolsDirections(lambda)) {
    std::vector<double> pooled;
    for (Direction d : kDirections) AppendProducts(mscn, d, x0, y0, w, h, pooled);
    try {
      out.aggd = FitAggd(pooled);
    } catch (const FitError&) {
      out.aggd_ok = false;
    }
  } else {
    std::array<AggdParams, 4> fits;
    for (int d = 0; d < 4; ++d) {
      std::vector<double> products;
      AppendProducts(mscn, kDirections[d], x0, y0, w, h, products);
      try {
        fits[d] = FitAggd(products);
      } catch (const FitError&) {
        fits[d] = {};
        out.aggd_ok = false;
      }
    }
    out.aggd = Average(fits);
  }
  return out;
}

}  // namespace

StSimMaps LocalStSim(const RealPlane& ref_mscn, const RealPlane& test_mscn, int lambda) {
  const int cut = 1 << (lambda + 2);
  const int width = ref_mscn.width(), height = ref_mscn.height();
  const int gw = (width + cut - 1) / cut, gh = (height + cut - 1) / cut;
  const int cw = std::min(cut, width), ch = std::min(cut, height);
  StSimMaps out{RealPlane(gw, gh), RealPlane(gw, gh)};
  for (int cy = 0; cy < gh; ++cy) {
    for (int cx = 0; cx < gw; ++cx) {
      const int x0 = CutOrigin(cx, cut, width), y0 = CutOrigin(cy, cut, height);
      const CutFits r = FitCut(ref_mscn, x0, y0, cw, ch, lambda);
      const CutFits t = FitCut(test_mscn, x0, y0, cw, ch, lambda);
      out.fosd(cx, cy) = (!r.ggd_ok && !t.ggd_ok) ? 0.0 : Fosd(r.ggd, t.ggd);
      out.sosd(cx, cy) = (!r.aggd_ok && !t.aggd_ok) ? 0.0 : Sosd(r.aggd, t.aggd);
    }
  }
  return out;
}

}  // namespace cutfunque::nss
