#ifndef CUTFUNQUE_HDRMAX_H_
#define CUTFUNQUE_HDRMAX_H_

#include "cutfunque/plane.h"
#include "cutfunque/pucolor.h"

// Local contrast expansion: windowed min/max normalization to [-1, 1]
// followed by sgn(x) (exp(gain |x|) - 1).
namespace cutfunque::hdrmax {

struct Config {
  int window = 17;
  double gain = 4.0;
};

// Sliding-window minimum and maximum over a window x window square centred on
// each pixel, with symmetric mirror padding. Window must be odd.
RealPlane SlidingMin(const RealPlane& in, int window);
RealPlane SlidingMax(const RealPlane& in, int window);

// 2 (I - min) / (max - min) - 1 per pixel; 0 where the window is flat.
RealPlane MinMaxNormalize(const RealPlane& in, int window);

double Expand(double v, double gain);

RealPlane Apply(const RealPlane& in, const Config& config = {});

// Applies the transform to L, Re(c) and Im(c) independently.
pucolor::PUFrame Apply(const pucolor::PUFrame& frame, const Config& config = {});

// Largest magnitude the transform can produce.
inline double OutputRange(const Config& config = {}) { return 2.0 * (std::exp(config.gain) - 1.0); }

}  // namespace cutfunque::hdrmax

#endif  // CUTFUNQUE_HDRMAX_H_
