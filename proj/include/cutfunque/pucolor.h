#ifndef CUTFUNQUE_PUCOLOR_H_
#define CUTFUNQUE_PUCOLOR_H_

#include <Eigen/Core>
#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "cutfunque/error.h"
#include "cutfunque/plane.h"
#include "cutfunque/video_io.h"
#include "json.hpp"

// Perceptually uniform color encoding. Each chromatic direction u_i gets a
// luminance-dependent gain w_i(y) = h_i(y)/y, the line integral of the
// reciprocal detection threshold along the ray from black to the stimulus.
namespace cutfunque::pucolor {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Params = std::array<double, 5>;

// Threshold function built from three base sensitivities s_A, s_R, s_B of
// spatial frequency and luminance, and the opponent matrix M_ARB.
class ThresholdModel {
 public:
  enum class Kind { kConstant, kWeber, kDeVriesRose, kWeberFloor, kTable };

  // s = k*y: the threshold is 1/(k*|M u|) everywhere.
  static ThresholdModel Constant(double k, const Mat3& m_arb = Mat3::Identity());
  // s = 1/k: threshold proportional to luminance (Weber's law).
  static ThresholdModel Weber(double k, const Mat3& m_arb = Mat3::Identity());
  // s = sqrt(y)/k: threshold grows with the square root of luminance.
  static ThresholdModel DeVriesRose(double k, const Mat3& m_arb = Mat3::Identity());
  // s = y / (k (y + y0)): Weber behaviour above y0 with a dark floor below.
  static ThresholdModel WeberFloor(double k, double y0, const Mat3& m_arb = Mat3::Identity());
  // Tabulated sensitivities sampled on rho x y, interpolated bilinearly in
  // log-log coordinates and clamped at the table edges. tables[c][i][j]
  // holds channel c at rho[i], y[j].
  static ThresholdModel Table(std::vector<double> rho, std::vector<double> y,
                              std::array<std::vector<std::vector<double>>, 3> tables,
                              const Mat3& m_arb = Mat3::Identity());

  static ThresholdModel FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;

  Kind kind() const { return kind_; }
  const Mat3& m_arb() const { return m_arb_; }
  std::span<const double> rho_grid() const { return rho_; }

  Vec3 Sensitivity(double rho, double y) const;

  // Detection threshold along direction u for luminance y = x_L + x_M.
  double ThresholdAtLuminance(double y, const Vec3& u) const;

 private:
  ThresholdModel() = default;

  Kind kind_ = Kind::kConstant;
  Mat3 m_arb_ = Mat3::Identity();
  double k_ = 1.0;
  double y0_ = 1.0;
  std::vector<double> rho_{1.0};
  std::vector<double> table_y_;
  std::array<std::vector<std::vector<double>>, 3> tables_;
};

// t(x, u); throws DomainError when x_L + x_M <= 0.
double Threshold(const ThresholdModel& model, const Vec3& lms, const Vec3& u);

// Opponent (DKL) transform and the chromatic directions U = M_DKL^-1.
struct ChromaticBasis {
  Mat3 m_dkl;
  Mat3 directions;

  static ChromaticBasis FromDkl(const Mat3& m_dkl);
  // DKL matrix that zeroes both chromatic channels for the given white LMS.
  static ChromaticBasis ForWhite(const Vec3& white_lms);

  Vec3 direction(int i) const { return directions.col(i); }
};

struct IntegralTables {
  std::vector<double> y;
  std::array<std::vector<double>, 3> values;
};

inline constexpr double kLambdaFloor = 1e-8;
inline constexpr double kQuadratureTolerance = 1e-7;

// I_i(y) = integral over lambda in [kLambdaFloor, 1] of 1 / t(lambda y, u_i).
IntegralTables IntegratePu(const ThresholdModel& model, const ChromaticBasis& basis,
                           std::span<const double> y_grid);

std::vector<double> LogSpace(double lo, double hi, int count);

// h(y; p) = ((p1 + p2 y^p4) / (1 + p3 y^p4))^p5
double EvaluateH(const Params& p, double y);

struct FitResult {
  Params p{};
  double r2 = 0.0;
};

inline constexpr double kMinFitR2 = 0.999;

// Least-squares fit of h(y;p)/y to the tabulated integrals, residuals taken on
// log h over the (log-spaced) luminance samples; r^2 is measured on log I.
// Throws FitFailure carrying the best fit when r^2 <= kMinFitR2.
FitResult FitNonlinearity(std::span<const double> y, std::span<const double> integrals);

// Raised by FitNonlinearity; carries the best fit found.
class FitFailure : public CalibrationError {
 public:
  FitFailure(const std::string& message, FitResult best)
      : CalibrationError("pucolor", message), best_(best) {}
  const FitResult& best() const { return best_; }

 private:
  FitResult best_;
};

struct PUCalibration {
  std::array<Params, 3> p{};
  std::array<double, 3> r2{};
  double y_min = 1e-4;
  double y_max = 1e4;
  double gain = 1.0;
  double offset = 0.0;
  Mat3 xyz_to_lms = DefaultXyzToLms();
  Mat3 m_dkl = Mat3::Identity();
  std::optional<ThresholdModel> threshold_model;

  static PUCalibration FromJson(const nlohmann::json& j);
  static PUCalibration Load(const std::filesystem::path& path);
  nlohmann::json ToJson() const;
  void Save(const std::filesystem::path& path) const;
};

// Runs the quadrature and the fits for all three directions, then derives the
// affine scaling that maps white at y_min to 0 and white at y_max to 1.
PUCalibration Calibrate(const ThresholdModel& model, const Mat3& xyz_to_lms, double y_min,
                        double y_max, int samples = 200);

// Perceptually encoded frame: achromatic L and complex chroma c = a + jb.
struct PUFrame {
  RealPlane luma;
  ComplexPlane chroma;

  int width() const { return luma.width(); }
  int height() const { return luma.height(); }
};

class PUEncoder {
 public:
  static constexpr int kLutSize = 4096;

  explicit PUEncoder(PUCalibration calibration);

  const PUCalibration& calibration() const { return calibration_; }

  // w_i(y) from the log-y lookup table (y clamped to the calibrated domain).
  Vec3 Weights(double y) const;
  // w_i(y) = h_i(y)/y evaluated directly.
  Vec3 DirectWeights(double y) const;

  // w ⊙ (M_DKL x) without the affine scaling.
  Vec3 EncodeRaw(const Vec3& lms) const;
  // (L, a, b) after scaling.
  Vec3 EncodePixel(const Vec3& lms) const;

  PUFrame Encode(const LinearFrame& frame) const;

 private:
  PUCalibration calibration_;
  double log_y_min_;
  double log_step_;
  std::array<std::vector<double>, 3> log_w_lut_;
};

}  // namespace cutfunque::pucolor

#endif  // CUTFUNQUE_PUCOLOR_H_
