#ifndef CUTFUNQUE_PLANE_H_
#define CUTFUNQUE_PLANE_H_

#include <cassert>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cutfunque {

// Dense row-major 2-D array of samples.
template <typename T>
class Plane {
 public:
  using value_type = T;

  Plane() = default;
  Plane(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<size_t>(width) * static_cast<size_t>(height), fill) {
    assert(width >= 0 && height >= 0);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) { return data_[Index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[Index(x, y)]; }

  std::span<T> Row(int y) {
    return {data_.data() + static_cast<size_t>(y) * width_, static_cast<size_t>(width_)};
  }
  std::span<const T> Row(int y) const {
    return {data_.data() + static_cast<size_t>(y) * width_, static_cast<size_t>(width_)};
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool operator==(const Plane&) const = default;

 private:
  size_t Index(int x, int y) const {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_);
    return static_cast<size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using RealPlane = Plane<double>;
using ComplexPlane = Plane<std::complex<double>>;

// Symmetric (edge-duplicating) reflection: -1 -> 0, n -> n-1.
inline int MirrorIndex(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

// Bilinear resampling with pixel-centre alignment and edge clamping.
RealPlane ResizeBilinear(const RealPlane& in, int out_width, int out_height);

// Pads on the right/bottom with symmetric mirroring.
template <typename T>
Plane<T> PadMirror(const Plane<T>& in, int out_width, int out_height) {
  Plane<T> out(out_width, out_height);
  for (int y = 0; y < out_height; ++y) {
    const int sy = MirrorIndex(y, in.height());
    for (int x = 0; x < out_width; ++x) out(x, y) = in(MirrorIndex(x, in.width()), sy);
  }
  return out;
}

template <typename T>
Plane<T> Crop(const Plane<T>& in, int width, int height) {
  Plane<T> out(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) out(x, y) = in(x, y);
  return out;
}

RealPlane RealPart(const ComplexPlane& c);
RealPlane ImagPart(const ComplexPlane& c);
ComplexPlane MakeComplex(const RealPlane& re, const RealPlane& im);

}  // namespace cutfunque

#endif  // CUTFUNQUE_PLANE_H_
