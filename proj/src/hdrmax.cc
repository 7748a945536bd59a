#include "cutfunque/hdrmax.h"

#include <cmath>
#include <deque>
#include <functional>
#include <string>

#include "cutfunque/error.h"

namespace cutfunque::hdrmax {
namespace {

// Monotonic-deque sliding extremum over a mirrored 1-D signal.
template <typename Better>
void Extremum1D(std::span<const double> in, int radius, std::span<double> out, Better better) {
  const int n = static_cast<int>(in.size());
  std::deque<int> dq;  // positions in padded coordinates
  auto value = [&](int p) { return in[MirrorIndex(p, n)]; };
  for (int p = -radius; p < n + radius; ++p) {
    while (!dq.empty() && !better(value(dq.back()), value(p))) dq.pop_back();
    dq.push_back(p);
    const int centre = p - radius;
    if (centre < 0) continue;
    while (dq.front() < centre - radius) dq.pop_front();
    out[centre] = value(dq.front());
  }
}

template <typename Better>
RealPlane Extremum2D(const RealPlane& in, int window, Better better) {
  if (window < 1 || window % 2 == 0)
    throw ConfigError("hdrmax", "window must be a positive odd integer, got " + std::to_string(window));
  const int radius = window / 2;
  const int w = in.width(), h = in.height();
  RealPlane rows(w, h);
  for (int y = 0; y < h; ++y) Extremum1D(in.Row(y), radius, rows.Row(y), better);
  RealPlane out(w, h);
  std::vector<double> col(h), res(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) col[y] = rows(x, y);
    Extremum1D(col, radius, res, better);
    for (int y = 0; y < h; ++y) out(x, y) = res[y];
  }
  return out;
}

}  // namespace

RealPlane SlidingMin(const RealPlane& in, int window) {
  return Extremum2D(in, window, [](double kept, double incoming) { return kept < incoming; });
}

RealPlane SlidingMax(const RealPlane& in, int window) {
  return Extremum2D(in, window, [](double kept, double incoming) { return kept > incoming; });
}

RealPlane MinMaxNormalize(const RealPlane& in, int window) {
  const RealPlane lo = SlidingMin(in, window);
  const RealPlane hi = SlidingMax(in, window);
  RealPlane out(in.width(), in.height());
  for (int y = 0; y < in.height(); ++y) {
    for (int x = 0; x < in.width(); ++x) {
      const double range = hi(x, y) - lo(x, y);
      out(x, y) = range > 0 ? 2.0 * (in(x, y) - lo(x, y)) / range - 1.0 : 0.0;
    }
  }
  return out;
}

double Expand(double v, double gain) {
  return std::copysign(std::expm1(gain * std::abs(v)), v);
}

RealPlane Apply(const RealPlane& in, const Config& config) {
  RealPlane out = MinMaxNormalize(in, config.window);
  for (double& v : out.data()) v = Expand(v, config.gain);
  return out;
}

pucolor::PUFrame Apply(const pucolor::PUFrame& frame, const Config& config) {
  return {Apply(frame.luma, config),
          MakeComplex(Apply(RealPart(frame.chroma), config), Apply(ImagPart(frame.chroma), config))};
}

}  // namespace cutfunque::hdrmax
