// Synthetic HDR content for pipeline-level tests.
#ifndef CUTFUNQUE_TESTS_FIXTURES_H_
#define CUTFUNQUE_TESTS_FIXTURES_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cutfunque/transfer.h"
#include "cutfunque/video_io.h"

namespace fixture {

using cutfunque::LinearFrame;
using cutfunque::RealPlane;

// PQ-coded RGB signals in [0, 1] for one frame of moving gratings, a
// bright disc and fixed fine texture.
struct SignalFrame {
  RealPlane r, g, b;
};

inline std::vector<SignalFrame> MovingScene(int w, int h, int frames, uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  RealPlane texture(w, h);
  for (double& v : texture.data()) v = u(rng);
  std::vector<SignalFrame> out;
  const double tau = 2 * std::numbers::pi;
  for (int t = 0; t < frames; ++t) {
    SignalFrame f{RealPlane(w, h), RealPlane(w, h), RealPlane(w, h)};
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double dx = x - w * (0.3 + 0.02 * t), dy = y - h * 0.6;
        const double disc = dx * dx + dy * dy < 0.04 * w * h ? 0.2 : 0.0;
        const double base = 0.35 + 0.12 * std::sin(tau * (x / 23.0 + t / 9.0)) + 0.08 * std::cos(tau * y / 17.0) +
                            0.04 * texture(x, y) + disc;
        f.r(x, y) = std::clamp(base + 0.04 * std::sin(tau * x / 41.0), 0.0, 1.0);
        f.g(x, y) = std::clamp(base, 0.0, 1.0);
        f.b(x, y) = std::clamp(base - 0.04 * std::cos(tau * (y + t) / 29.0), 0.0, 1.0);
      }
    out.push_back(std::move(f));
  }
  return out;
}

// Adds N(0, sigma) to every signal sample.
inline std::vector<SignalFrame> AddNoise(std::vector<SignalFrame> frames, double sigma, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  for (auto& f : frames)
    for (RealPlane* p : {&f.r, &f.g, &f.b})
      for (double& v : p->data()) v = std::clamp(v + n(rng), 0.0, 1.0);
  return frames;
}

inline std::vector<LinearFrame> ToLinear(const std::vector<SignalFrame>& frames) {
  const Eigen::Matrix3d to_lms = cutfunque::DefaultXyzToLms() * cutfunque::RgbToXyz(cutfunque::Gamut::kBt2020);
  std::vector<LinearFrame> out;
  for (const auto& f : frames) {
    const int w = f.r.width(), h = f.r.height();
    LinearFrame lf{RealPlane(w, h), RealPlane(w, h), RealPlane(w, h)};
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const Eigen::Vector3d rgb(cutfunque::transfer::PqEotf(f.r(x, y)), cutfunque::transfer::PqEotf(f.g(x, y)),
                                  cutfunque::transfer::PqEotf(f.b(x, y)));
        const Eigen::Vector3d lms = to_lms * rgb;
        lf.l(x, y) = lms(0);
        lf.m(x, y) = lms(1);
        lf.s(x, y) = lms(2);
      }
    out.push_back(std::move(lf));
  }
  return out;
}

// Writes 10-bit 4:4:4 full-range BT.2020 PQ y4m.
inline void WriteY4m(const std::string& path, const std::vector<SignalFrame>& frames) {
  const int w = frames.front().r.width(), h = frames.front().r.height();
  std::ofstream out(path, std::ios::binary);
  out << "YUV4MPEG2 W" << w << " H" << h << " F24:1 Ip A1:1 C444p10\n";
  const double kr = 0.2627, kb = 0.0593, kg = 1 - kr - kb;
  auto put = [&](double v) {
    const int code = std::clamp(static_cast<int>(std::lround(v * 1023)), 0, 1023);
    out.put(static_cast<char>(code & 0xff));
    out.put(static_cast<char>(code >> 8));
  };
  for (const auto& f : frames) {
    out << "FRAME\n";
    std::vector<double> ys, cbs, crs;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double luma = kr * f.r(x, y) + kg * f.g(x, y) + kb * f.b(x, y);
        ys.push_back(luma);
        cbs.push_back((f.b(x, y) - luma) / (2 * (1 - kb)) + 512.0 / 1023);
        crs.push_back((f.r(x, y) - luma) / (2 * (1 - kr)) + 512.0 / 1023);
      }
    for (double v : ys) put(v);
    for (double v : cbs) put(v);
    for (double v : crs) put(v);
  }
}

}  // namespace fixture

#endif  // CUTFUNQUE_TESTS_FIXTURES_H_
