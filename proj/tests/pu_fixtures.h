// Threshold tables and calibration checks shared by the PUColor tests.
#ifndef CUTFUNQUE_TESTS_PU_FIXTURES_H_
#define CUTFUNQUE_TESTS_PU_FIXTURES_H_

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "cutfunque/pucolor.h"

namespace pu_fixture {

using namespace cutfunque::pucolor;

inline Mat3 SomeDkl() {
  Mat3 m;
  m << 1.0, 1.0, 0.0, 1.0, -1.1, 0.0, -1.0, -1.0, 2.3;
  return m;
}

// Band-pass sensitivity following the square-root law in luminance.
inline ThresholdModel SquareRootTable() {
  std::vector<double> rho = {0.5, 1, 2, 4, 8, 16};
  std::vector<double> y = LogSpace(1e-14, 1e6, 41);
  std::array<std::vector<std::vector<double>>, 3> t;
  for (int c = 0; c < 3; ++c) {
    t[c].assign(rho.size(), std::vector<double>(y.size()));
    for (size_t i = 0; i < rho.size(); ++i)
      for (size_t j = 0; j < y.size(); ++j)
        t[c][i][j] = (30.0 + 20.0 * c) * rho[i] * std::exp(-rho[i] / (3.0 - c)) * std::sqrt(y[j]);
  }
  return ThresholdModel::Table(rho, y, t);
}

// Sensitivity table shaped like a band-pass contrast sensitivity that grows
// with luminance and saturates.
inline ThresholdModel SyntheticTable() {
  std::vector<double> rho = {0.5, 1, 2, 4, 8, 16};
  std::vector<double> y = LogSpace(1e-5, 1e5, 41);
  std::array<std::vector<std::vector<double>>, 3> t;
  const double peak[3] = {3.0, 1.0, 0.5};
  for (int c = 0; c < 3; ++c) {
    t[c].assign(rho.size(), std::vector<double>(y.size()));
    for (size_t i = 0; i < rho.size(); ++i)
      for (size_t j = 0; j < y.size(); ++j) {
        const double band = rho[i] * std::exp(-rho[i] / (peak[c] + 1.0));
        t[c][i][j] = 200.0 * band * y[j] / (y[j] + 0.3 * std::pow(y[j], 0.4) + 1.0);
      }
  }
  return ThresholdModel::Table(rho, y, t);
}

// Largest relative deviation of the LUT weights from direct quadrature.
inline double LutQuadratureDeviation(const PUCalibration& cal) {
  const PUEncoder enc(cal);
  const auto basis = ChromaticBasis::FromDkl(cal.m_dkl);
  const auto grid = LogSpace(cal.y_min, cal.y_max, 97);
  const auto tables = IntegratePu(*cal.threshold_model, basis, grid);
  double worst = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    const Vec3 w = enc.Weights(grid[i]);
    for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(w(c) / tables.values[c][i] - 1.0));
  }
  return worst;
}

}  // namespace pu_fixture

#endif  // CUTFUNQUE_TESTS_PU_FIXTURES_H_
