#include "cutfunque/transfer.h"

#include <algorithm>
#include <cmath>

namespace cutfunque::transfer {
namespace {

constexpr double kPqM1 = 2610.0 / 16384.0;
constexpr double kPqM2 = 128.0 * 2523.0 / 4096.0;
constexpr double kPqC1 = 3424.0 / 4096.0;
constexpr double kPqC2 = 32.0 * 2413.0 / 4096.0;
constexpr double kPqC3 = 32.0 * 2392.0 / 4096.0;
constexpr double kPqPeak = 10000.0;

constexpr double kHlgA = 0.17883277;
constexpr double kHlgB = 1.0 - 4.0 * kHlgA;
const double kHlgC = 0.5 - kHlgA * std::log(4.0 * kHlgA);

}  // namespace

double PqEotf(double signal) {
  const double e = std::pow(std::clamp(signal, 0.0, 1.0), 1.0 / kPqM2);
  const double num = std::max(e - kPqC1, 0.0);
  const double den = kPqC2 - kPqC3 * e;
  return kPqPeak * std::pow(num / den, 1.0 / kPqM1);
}

double HlgInverseOetf(double signal) {
  const double e = std::clamp(signal, 0.0, 1.0);
  if (e <= 0.5) return e * e / 3.0;
  return (std::exp((e - kHlgC) / kHlgA) + kHlgB) / 12.0;
}

double HlgSystemGamma(double peak_nits) { return 1.2 + 0.42 * std::log10(peak_nits / 1000.0); }

double Bt1886Eotf(double signal, double peak_nits) {
  return peak_nits * std::pow(std::clamp(signal, 0.0, 1.0), 2.4);
}

}  // namespace cutfunque::transfer
