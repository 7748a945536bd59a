#include "cutfunque/plane.h"

#include <algorithm>
#include <cmath>

namespace cutfunque {

RealPlane ResizeBilinear(const RealPlane& in, int out_width, int out_height) {
  if (in.width() == out_width && in.height() == out_height) return in;
  RealPlane out(out_width, out_height);
  const double sx = static_cast<double>(in.width()) / out_width;
  const double sy = static_cast<double>(in.height()) / out_height;
  for (int y = 0; y < out_height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, in.height() - 1.0);
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, in.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, in.width() - 1.0);
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, in.width() - 1);
      const double wx = fx - x0;
      const double top = in(x0, y0) * (1 - wx) + in(x1, y0) * wx;
      const double bottom = in(x0, y1) * (1 - wx) + in(x1, y1) * wx;
      out(x, y) = top * (1 - wy) + bottom * wy;
    }
  }
  return out;
}

RealPlane RealPart(const ComplexPlane& c) {
  RealPlane out(c.width(), c.height());
  auto src = c.data();
  auto dst = out.data();
  for (size_t i = 0; i < src.size(); ++i) dst[i] = src[i].real();
  return out;
}

RealPlane ImagPart(const ComplexPlane& c) {
  RealPlane out(c.width(), c.height());
  auto src = c.data();
  auto dst = out.data();
  for (size_t i = 0; i < src.size(); ++i) dst[i] = src[i].imag();
  return out;
}

ComplexPlane MakeComplex(const RealPlane& re, const RealPlane& im) {
  ComplexPlane out(re.width(), re.height());
  auto r = re.data();
  auto i = im.data();
  auto dst = out.data();
  for (size_t k = 0; k < dst.size(); ++k) dst[k] = {r[k], i[k]};
  return out;
}

}  // namespace cutfunque
