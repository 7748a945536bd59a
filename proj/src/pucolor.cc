#include "cutfunque/pucolor.h"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace cutfunque::pucolor {
namespace {

nlohmann::json MatrixToJson(const Mat3& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

Mat3 MatrixFromJson(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("pucolor", std::string(what) + " must be 3x3");
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    if (!j[r].is_array() || j[r].size() != 3)
      throw ConfigError("pucolor", std::string(what) + " must be 3x3");
    for (int c = 0; c < 3; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

// Index of the interval containing v in an ascending grid and the fractional
// position within it, clamped to the grid ends.
std::pair<size_t, double> Locate(std::span<const double> grid, double v) {
  if (grid.size() == 1 || v <= grid.front()) return {0, 0.0};
  if (v >= grid.back()) return {grid.size() - 2, 1.0};
  const size_t hi = std::upper_bound(grid.begin(), grid.end(), v) - grid.begin();
  const size_t lo = hi - 1;
  return {lo, (v - grid[lo]) / (grid[hi] - grid[lo])};
}

double LogH(const Params& p, double y) {
  const double t = std::pow(y, p[3]);
  return p[4] * (std::log(p[0] + p[1] * t) - std::log(1.0 + p[2] * t));
}

Params FromUnconstrained(const Eigen::Matrix<double, 5, 1>& q) {
  return {q(0) * q(0), std::exp(q(1)), q(2) * q(2), std::exp(q(3)), std::exp(q(4))};
}

struct LogFit {
  std::span<const double> y;
  std::span<const double> target;  // log(y * I)

  Eigen::VectorXd Residuals(const Eigen::Matrix<double, 5, 1>& q) const {
    const Params p = FromUnconstrained(q);
    Eigen::VectorXd r(y.size());
    for (size_t k = 0; k < y.size(); ++k) r(k) = LogH(p, y[k]) - target[k];
    return r;
  }

  static double Cost(const Eigen::VectorXd& r) {
    const double c = r.squaredNorm();
    return std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
  }

  // Levenberg-Marquardt with a forward-difference Jacobian.
  Eigen::Matrix<double, 5, 1> Solve(Eigen::Matrix<double, 5, 1> q) const {
    Eigen::VectorXd r = Residuals(q);
    double cost = Cost(r);
    if (!std::isfinite(cost)) return q;
    double damping = 1e-3;
    Eigen::MatrixXd jac(y.size(), 5);
    for (int iter = 0; iter < 400 && damping < 1e12; ++iter) {
      for (int c = 0; c < 5; ++c) {
        Eigen::Matrix<double, 5, 1> qs = q;
        const double h = 1e-7 * (1.0 + std::abs(q(c)));
        qs(c) += h;
        jac.col(c) = (Residuals(qs) - r) / h;
      }
      if (!jac.allFinite()) break;
      const Eigen::Matrix<double, 5, 5> jtj = jac.transpose() * jac;
      const Eigen::Matrix<double, 5, 1> grad = jac.transpose() * r;
      bool improved = false;
      while (damping < 1e12) {
        Eigen::Matrix<double, 5, 5> a = jtj;
        for (int d = 0; d < 5; ++d) a(d, d) += damping * (jtj(d, d) + 1e-12);
        const Eigen::Matrix<double, 5, 1> step = a.ldlt().solve(-grad);
        const Eigen::Matrix<double, 5, 1> trial = q + step;
        const Eigen::VectorXd r_trial = Residuals(trial);
        const double c_trial = Cost(r_trial);
        if (c_trial < cost) {
          const double rel = (cost - c_trial) / std::max(cost, 1e-300);
          q = trial;
          r = r_trial;
          cost = c_trial;
          damping = std::max(damping / 3.0, 1e-12);
          improved = true;
          if (rel < 1e-14) return q;
          break;
        }
        damping *= 4.0;
      }
      if (!improved) break;
    }
    return q;
  }
};

}  // namespace

ThresholdModel ThresholdModel::Constant(double k, const Mat3& m_arb) {
  ThresholdModel m;
  m.kind_ = Kind::kConstant;
  m.k_ = k;
  m.m_arb_ = m_arb;
  return m;
}

ThresholdModel ThresholdModel::Weber(double k, const Mat3& m_arb) {
  ThresholdModel m;
  m.kind_ = Kind::kWeber;
  m.k_ = k;
  m.m_arb_ = m_arb;
  return m;
}

ThresholdModel ThresholdModel::DeVriesRose(double k, const Mat3& m_arb) {
  ThresholdModel m;
  m.kind_ = Kind::kDeVriesRose;
  m.k_ = k;
  m.m_arb_ = m_arb;
  return m;
}

ThresholdModel ThresholdModel::WeberFloor(double k, double y0, const Mat3& m_arb) {
  ThresholdModel m;
  m.kind_ = Kind::kWeberFloor;
  m.k_ = k;
  m.y0_ = y0;
  m.m_arb_ = m_arb;
  return m;
}

ThresholdModel ThresholdModel::Table(std::vector<double> rho, std::vector<double> y,
                                     std::array<std::vector<std::vector<double>>, 3> tables,
                                     const Mat3& m_arb) {
  if (rho.empty() || y.empty()) throw ConfigError("pucolor", "sensitivity table needs rho and y grids");
  if (!std::is_sorted(rho.begin(), rho.end()) || !std::is_sorted(y.begin(), y.end()))
    throw ConfigError("pucolor", "sensitivity grids must be ascending");
  for (const auto& t : tables) {
    if (t.size() != rho.size()) throw ConfigError("pucolor", "sensitivity table rows != rho grid");
    for (const auto& row : t) {
      if (row.size() != y.size()) throw ConfigError("pucolor", "sensitivity table cols != y grid");
      for (double v : row)
        if (!(v > 0)) throw ConfigError("pucolor", "sensitivities must be positive");
    }
  }
  ThresholdModel m;
  m.kind_ = Kind::kTable;
  m.m_arb_ = m_arb;
  m.rho_ = std::move(rho);
  m.table_y_ = std::move(y);
  m.tables_ = std::move(tables);
  return m;
}

ThresholdModel ThresholdModel::FromJson(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const Mat3 m_arb = j.contains("m_arb") ? MatrixFromJson(j["m_arb"], "m_arb") : Mat3::Identity();
  if (std::abs(m_arb.determinant()) < 1e-12) throw ConfigError("pucolor", "M_ARB must be invertible");
  if (kind == "constant") return Constant(j.at("k").get<double>(), m_arb);
  if (kind == "weber") return Weber(j.at("k").get<double>(), m_arb);
  if (kind == "devries_rose") return DeVriesRose(j.at("k").get<double>(), m_arb);
  if (kind == "weber_floor")
    return WeberFloor(j.at("k").get<double>(), j.at("y0").get<double>(), m_arb);
  if (kind == "table") {
    std::array<std::vector<std::vector<double>>, 3> tables;
    const char* names[3] = {"s_A", "s_R", "s_B"};
    for (int c = 0; c < 3; ++c) tables[c] = j.at(names[c]).get<std::vector<std::vector<double>>>();
    return Table(j.at("rho").get<std::vector<double>>(), j.at("y").get<std::vector<double>>(),
                 std::move(tables), m_arb);
  }
  throw ConfigError("pucolor", "unknown threshold model kind '" + kind + "'");
}

nlohmann::json ThresholdModel::ToJson() const {
  nlohmann::json j;
  j["m_arb"] = MatrixToJson(m_arb_);
  switch (kind_) {
    case Kind::kConstant:
      j["kind"] = "constant";
      j["k"] = k_;
      break;
    case Kind::kWeber:
      j["kind"] = "weber";
      j["k"] = k_;
      break;
    case Kind::kDeVriesRose:
      j["kind"] = "devries_rose";
      j["k"] = k_;
      break;
    case Kind::kWeberFloor:
      j["kind"] = "weber_floor";
      j["k"] = k_;
      j["y0"] = y0_;
      break;
    case Kind::kTable:
      j["kind"] = "table";
      j["rho"] = rho_;
      j["y"] = table_y_;
      j["s_A"] = tables_[0];
      j["s_R"] = tables_[1];
      j["s_B"] = tables_[2];
      break;
  }
  return j;
}

Vec3 ThresholdModel::Sensitivity(double rho, double y) const {
  switch (kind_) {
    case Kind::kConstant:
      return Vec3::Constant(k_ * y);
    case Kind::kWeber:
      return Vec3::Constant(1.0 / k_);
    case Kind::kDeVriesRose:
      return Vec3::Constant(std::sqrt(y) / k_);
    case Kind::kWeberFloor:
      return Vec3::Constant(y / (k_ * (y + y0_)));
    case Kind::kTable:
      break;
  }
  std::vector<double> log_rho(rho_.size()), log_y(table_y_.size());
  std::transform(rho_.begin(), rho_.end(), log_rho.begin(), [](double v) { return std::log(v); });
  std::transform(table_y_.begin(), table_y_.end(), log_y.begin(), [](double v) { return std::log(v); });
  const auto [i, fi] = Locate(log_rho, std::log(rho));
  const auto [k, fk] = Locate(log_y, std::log(y));
  const size_t i1 = std::min(i + 1, rho_.size() - 1);
  const size_t k1 = std::min(k + 1, table_y_.size() - 1);
  Vec3 s;
  for (int c = 0; c < 3; ++c) {
    const auto& t = tables_[c];
    const double a = std::log(t[i][k]) * (1 - fk) + std::log(t[i][k1]) * fk;
    const double b = std::log(t[i1][k]) * (1 - fk) + std::log(t[i1][k1]) * fk;
    s(c) = std::exp(a * (1 - fi) + b * fi);
  }
  return s;
}

double ThresholdModel::ThresholdAtLuminance(double y, const Vec3& u) const {
  if (!(y > 0)) throw DomainError("pucolor", "threshold requires positive luminance, got " + std::to_string(y));
  const Vec3 opponent = m_arb_ * u;
  double best = std::numeric_limits<double>::infinity();
  for (double rho : rho_) {
    const double norm = (Sensitivity(rho, y) / y).cwiseProduct(opponent).norm();
    best = std::min(best, 1.0 / norm);
  }
  return best;
}

double Threshold(const ThresholdModel& model, const Vec3& lms, const Vec3& u) {
  return model.ThresholdAtLuminance(lms(0) + lms(1), u);
}

ChromaticBasis ChromaticBasis::FromDkl(const Mat3& m_dkl) {
  if (std::abs(m_dkl.determinant()) < 1e-12) throw ConfigError("pucolor", "M_DKL must be invertible");
  return {m_dkl, m_dkl.inverse()};
}

ChromaticBasis ChromaticBasis::ForWhite(const Vec3& w) {
  Mat3 m;
  m << 1.0, 1.0, 0.0,         //
      1.0, -w(0) / w(1), 0.0,  //
      -1.0, -1.0, (w(0) + w(1)) / w(2);
  return FromDkl(m);
}

std::vector<double> LogSpace(double lo, double hi, int count) {
  std::vector<double> out(count);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < count; ++i)
    out[i] = count == 1 ? lo : std::exp(a + (b - a) * i / (count - 1));
  return out;
}

IntegralTables IntegratePu(const ThresholdModel& model, const ChromaticBasis& basis,
                           std::span<const double> y_grid) {
  using boost::math::quadrature::gauss_kronrod;
  IntegralTables out;
  out.y.assign(y_grid.begin(), y_grid.end());
  const double lower = std::log(kLambdaFloor);
  for (int c = 0; c < 3; ++c) {
    const Vec3 u = basis.direction(c);
    out.values[c].reserve(y_grid.size());
    for (double y : y_grid) {
      // Substituting lambda = e^s keeps the integrand smooth near the floor.
      auto integrand = [&](double s) {
        const double lambda = std::exp(s);
        return lambda / model.ThresholdAtLuminance(lambda * y, u);
      };
      double error = 0.0;
      const double value =
          gauss_kronrod<double, 31>::integrate(integrand, lower, 0.0, 15, kQuadratureTolerance, &error);
      if (!std::isfinite(value) || error > kQuadratureTolerance * std::abs(value) * 10.0) {
        std::ostringstream os;
        os << "quadrature did not converge for channel " << c << " at y=" << y << " (error " << error
           << ")";
        throw CalibrationError("pucolor", os.str());
      }
      out.values[c].push_back(value);
    }
  }
  return out;
}

double EvaluateH(const Params& p, double y) { return std::exp(LogH(p, y)); }

FitResult FitNonlinearity(std::span<const double> y, std::span<const double> integrals) {
  if (y.size() != integrals.size()) throw CalibrationError("pucolor", "fit inputs differ in length");
  if (y.size() < 50) throw CalibrationError("pucolor", "fit needs at least 50 samples");
  std::vector<double> target(y.size());
  for (size_t k = 0; k < y.size(); ++k) {
    if (!(y[k] > 0) || !(integrals[k] > 0))
      throw FitFailure("integral table must be positive", {{}, -std::numeric_limits<double>::infinity()});
    target[k] = std::log(y[k] * integrals[k]);
  }
  // r^2 is reported on log I = log h - log y, the log of the applied weight.
  double mean = 0.0;
  for (size_t k = 0; k < y.size(); ++k) mean += std::log(integrals[k]);
  mean /= static_cast<double>(y.size());
  double total = 0.0;
  for (size_t k = 0; k < y.size(); ++k) total += std::pow(std::log(integrals[k]) - mean, 2);
  const double exact = 1e-20 * static_cast<double>(y.size());

  const LogFit problem{y, target};
  const double y_lo = y.front(), y_hi = y.back();
  const double y_mid = std::sqrt(y_lo * y_hi);
  const double h_lo = std::exp(target.front());
  const double h_mid = std::exp(target[target.size() / 2]);

  FitResult best{{}, -std::numeric_limits<double>::infinity()};
  double best_cost = std::numeric_limits<double>::infinity();
  for (double p4 : {0.1, 0.3, 0.6, 1.0}) {
    for (double p5 : {0.5, 1.0, 2.0}) {
      for (double p3 : {0.0, 1e-6, 1e-3, 1.0}) {
        for (double p1_scale : {0.0, 0.5}) {
          const double p1 = p1_scale * std::pow(h_lo, 1.0 / p5);
          const double t_mid = std::pow(y_mid, p4);
          double p2 = (std::pow(h_mid, 1.0 / p5) * (1.0 + p3 * t_mid) - p1) / t_mid;
          if (!(p2 > 0) || !std::isfinite(p2)) p2 = std::pow(h_mid, 1.0 / p5) / t_mid;
          if (!(p2 > 0) || !std::isfinite(p2)) continue;
          Eigen::Matrix<double, 5, 1> q;
          q << std::sqrt(p1), std::log(p2), std::sqrt(p3), std::log(p4), std::log(p5);
          q = problem.Solve(q);
          const double cost = LogFit::Cost(problem.Residuals(q));
          if (cost < best_cost) {
            best_cost = cost;
            best.p = FromUnconstrained(q);
            best.r2 = total > exact ? 1.0 - cost / total : (cost <= exact ? 1.0 : 0.0);
          }
        }
      }
    }
  }
  if (!(best.r2 > kMinFitR2)) {
    std::ostringstream os;
    os << "nonlinearity fit reached r^2 = " << best.r2 << " (needs > " << kMinFitR2 << ")";
    throw FitFailure(os.str(), best);
  }
  return best;
}

PUCalibration PUCalibration::FromJson(const nlohmann::json& j) {
  PUCalibration c;
  const auto params = j.at("p").get<std::vector<std::vector<double>>>();
  if (params.size() != 3) throw ConfigError("pucolor", "calibration needs three parameter vectors");
  for (int i = 0; i < 3; ++i) {
    if (params[i].size() != 5) throw ConfigError("pucolor", "parameter vectors need five entries");
    std::copy(params[i].begin(), params[i].end(), c.p[i].begin());
  }
  if (j.contains("r2")) {
    const auto r2 = j["r2"].get<std::vector<double>>();
    std::copy_n(r2.begin(), std::min<size_t>(3, r2.size()), c.r2.begin());
  }
  const auto domain = j.at("luminance_domain").get<std::vector<double>>();
  if (domain.size() != 2 || !(domain[0] > 0) || !(domain[1] > domain[0]))
    throw ConfigError("pucolor", "luminance_domain must be [y_min, y_max] with 0 < y_min < y_max");
  c.y_min = domain[0];
  c.y_max = domain[1];
  c.gain = j.at("scale").at("gain").get<double>();
  c.offset = j.at("scale").at("offset").get<double>();
  c.xyz_to_lms = MatrixFromJson(j.at("xyz_to_lms"), "xyz_to_lms");
  c.m_dkl = MatrixFromJson(j.at("m_dkl"), "m_dkl");
  if (j.contains("threshold_model")) c.threshold_model = ThresholdModel::FromJson(j["threshold_model"]);
  return c;
}

PUCalibration PUCalibration::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("pucolor", "cannot open calibration " + path.string());
  try {
    return FromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("pucolor", "malformed calibration " + path.string() + ": " + e.what());
  }
}

nlohmann::json PUCalibration::ToJson() const {
  nlohmann::json j;
  j["p"] = {std::vector<double>(p[0].begin(), p[0].end()), std::vector<double>(p[1].begin(), p[1].end()),
            std::vector<double>(p[2].begin(), p[2].end())};
  j["r2"] = {r2[0], r2[1], r2[2]};
  j["luminance_domain"] = {y_min, y_max};
  j["scale"] = {{"gain", gain}, {"offset", offset}};
  j["xyz_to_lms"] = MatrixToJson(xyz_to_lms);
  j["m_dkl"] = MatrixToJson(m_dkl);
  if (threshold_model) j["threshold_model"] = threshold_model->ToJson();
  return j;
}

void PUCalibration::Save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("pucolor", "cannot write " + path.string());
  out << ToJson().dump(2) << "\n";
}

PUCalibration Calibrate(const ThresholdModel& model, const Mat3& xyz_to_lms, double y_min,
                        double y_max, int samples) {
  const Vec3 white_xyz(0.3127 / 0.3290, 1.0, (1.0 - 0.3127 - 0.3290) / 0.3290);
  const Vec3 white_lms = xyz_to_lms * white_xyz;
  const ChromaticBasis basis = ChromaticBasis::ForWhite(white_lms);
  const std::vector<double> grid = LogSpace(y_min, y_max, samples);
  const IntegralTables tables = IntegratePu(model, basis, grid);

  PUCalibration c;
  c.y_min = y_min;
  c.y_max = y_max;
  c.xyz_to_lms = xyz_to_lms;
  c.m_dkl = basis.m_dkl;
  c.threshold_model = model;
  for (int i = 0; i < 3; ++i) {
    const FitResult fit = FitNonlinearity(grid, tables.values[i]);
    c.p[i] = fit.p;
    c.r2[i] = fit.r2;
  }
  // Achromatic response to white of luminance y is h_1(y) * A_white / y_white.
  const double a_per_nit = (basis.m_dkl * white_lms)(0) / (white_lms(0) + white_lms(1));
  const double raw_lo = EvaluateH(c.p[0], y_min) * a_per_nit;
  const double raw_hi = EvaluateH(c.p[0], y_max) * a_per_nit;
  c.gain = 1.0 / (raw_hi - raw_lo);
  c.offset = -c.gain * raw_lo;
  return c;
}

PUEncoder::PUEncoder(PUCalibration calibration) : calibration_(std::move(calibration)) {
  log_y_min_ = std::log(calibration_.y_min);
  log_step_ = (std::log(calibration_.y_max) - log_y_min_) / (kLutSize - 1);
  for (auto& lut : log_w_lut_) lut.resize(kLutSize);
  for (int k = 0; k < kLutSize; ++k) {
    const double y = std::exp(log_y_min_ + k * log_step_);
    for (int c = 0; c < 3; ++c) log_w_lut_[c][k] = LogH(calibration_.p[c], y) - std::log(y);
  }
}

Vec3 PUEncoder::Weights(double y) const {
  const double pos = std::clamp((std::log(std::max(y, calibration_.y_min)) - log_y_min_) / log_step_,
                                0.0, static_cast<double>(kLutSize - 1));
  const int k = std::min(static_cast<int>(pos), kLutSize - 2);
  const double f = pos - k;
  Vec3 w;
  for (int c = 0; c < 3; ++c)
    w(c) = std::exp(log_w_lut_[c][k] * (1 - f) + log_w_lut_[c][k + 1] * f);
  return w;
}

Vec3 PUEncoder::DirectWeights(double y) const {
  const double yc = std::clamp(y, calibration_.y_min, calibration_.y_max);
  Vec3 w;
  for (int c = 0; c < 3; ++c) w(c) = EvaluateH(calibration_.p[c], yc) / yc;
  return w;
}

Vec3 PUEncoder::EncodeRaw(const Vec3& lms) const {
  return Weights(lms(0) + lms(1)).cwiseProduct(calibration_.m_dkl * lms);
}

Vec3 PUEncoder::EncodePixel(const Vec3& lms) const {
  const Vec3 raw = EncodeRaw(lms);
  return {calibration_.gain * raw(0) + calibration_.offset, calibration_.gain * raw(1),
          calibration_.gain * raw(2)};
}

PUFrame PUEncoder::Encode(const LinearFrame& frame) const {
  const int w = frame.width(), h = frame.height();
  PUFrame out{RealPlane(w, h), ComplexPlane(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vec3 v = EncodePixel({frame.l(x, y), frame.m(x, y), frame.s(x, y)});
      out.luma(x, y) = v(0);
      out.chroma(x, y) = {v(1), v(2)};
    }
  }
  return out;
}

}  // namespace cutfunque::pucolor
