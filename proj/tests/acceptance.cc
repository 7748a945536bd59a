// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cutfunque/binning.h"
#include "cutfunque/hdrmax.h"
#include "cutfunque/manifest.h"
#include "cutfunque/nss.h"
#include "cutfunque/pipeline.h"
#include "cutfunque/pucolor.h"
#include "cutfunque/wavelet.h"
#include "cutfunque/wavelet_features.h"
#include "fixtures.h"
#include "oracles.h"
#include "pu_fixtures.h"

namespace {

using namespace cutfunque;
using Complex = std::complex<double>;

constexpr double kSn2 = 0.1;

// Collects failures and the largest observed deviation.
class Tally {
 public:
  void Near(double got, double want, double tol, const std::string& what) {
    const double err = std::abs(got - want);
    if (!(err <= tol)) Fail(what + ": got " + FormatDouble(got) + ", want " + FormatDouble(want));
    worst_ = std::max(worst_, std::isfinite(err) ? err : HUGE_VAL);
  }
  void Near(Complex got, Complex want, double tol, const std::string& what) {
    Near(std::abs(got - want), 0.0, tol, what);
  }
  void True(bool ok, const std::string& what) {
    if (!ok) Fail(what);
  }
  void Fail(const std::string& what) {
    if (failures_++ == 0) first_ = what;
  }
  void Note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }

  bool ok() const { return failures_ == 0; }
  std::string Summary() const {
    std::ostringstream os;
    if (!ok()) os << failures_ << " failures, first: " << first_ << "; ";
    os << "max deviation " << worst_;
    if (!notes_.empty()) os << "; " << notes_;
    return os.str();
  }

 private:
  int failures_ = 0;
  double worst_ = 0;
  std::string first_, notes_;
};

ExtractorConfig DefaultConfig(int workers = 1) {
  ExtractorConfig cfg;
  cfg.calibration = pucolor::PUCalibration::Load(CUTFUNQUE_DATA_DIR "/calibration_default.json");
  cfg.csf = wavelet::CsfWeights::Load(CUTFUNQUE_DATA_DIR "/csf_watson.json");
  cfg.workers = workers;
  return cfg;
}

wavelet::CsfWeights RandomCsf(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.3, 2.0);
  wavelet::CsfWeights w = wavelet::CsfWeights::Ones();
  for (auto c : {wavelet::ChannelClass::kAchromatic, wavelet::ChannelClass::kRedGreen, wavelet::ChannelClass::kBlueYellow})
    for (int level = 1; level <= wavelet::kLevels; ++level)
      for (auto b : {wavelet::kA, wavelet::kH, wavelet::kV, wavelet::kD}) w.set(c, level, b, u(rng));
  return w;
}

oracle::WeightFn Fn(const wavelet::CsfWeights& w, wavelet::ChannelClass c) {
  return [&w, c](int level, int band) { return w.at(c, level, static_cast<wavelet::Band>(band)); };
}

features::ChannelPyramids Analyze(const pucolor::PUFrame& f, const wavelet::CsfWeights& w) {
  return {wavelet::ApplyCsf(wavelet::HaarAnalyze(f.luma), w, wavelet::ChannelClass::kAchromatic),
          wavelet::ApplyCsf(wavelet::HaarAnalyze(f.chroma), w)};
}

bool IsQualityName(const std::string& name) {
  return name.find("SSIM") != std::string::npos || name.find("VIF") != std::string::npos ||
         name.find("DLM") != std::string::npos;
}

bool IsDistortionName(const std::string& name) {
  return name.find("RRED") != std::string::npos || name.find("FOSD") != std::string::npos ||
         name.find("SOSD") != std::string::npos;
}

Tally Identity() {
  Tally t;
  const ExtractorConfig cfg = DefaultConfig();
  const auto frames = fixture::ToLinear(fixture::MovingScene(256, 256, 8));
  const FeatureManifest manifest = FeatureManifest::Canonical();
  const FeatureExtractor ex(cfg, manifest);

  const auto start = std::chrono::steady_clock::now();
  MemorySource ref(frames), test(frames);
  const ExtractionResult r = ex.Run(ref, test);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  t.True(seconds < 30.0, "runtime " + FormatDouble(seconds) + " s");
  t.Note("8 frames 256x256 in " + FormatDouble(std::round(seconds * 100) / 100) + " s");

  int checked = 0;
  for (size_t f = 0; f < r.frames.size(); ++f)
    for (size_t i = 0; i < manifest.size(); ++i) {
      const std::string& name = manifest.entries()[i].name;
      const auto& v = r.frames[f][i];
      if (!v) {
        t.True(f == 0, name + " absent on frame " + std::to_string(f));
        continue;
      }
      if (IsQualityName(name)) t.Near(*v, 1.0, 1e-9, name), ++checked;
      if (IsDistortionName(name)) t.Near(*v, 0.0, 1e-9, name), ++checked;
    }

  // Every map at every scale, for both variants, on the first two frames.
  const pucolor::PUEncoder enc(cfg.calibration);
  const double factor = wavelet::SastFactor(cfg.viewing, 256);
  for (int v = 0; v < kVariants; ++v) {
    std::vector<features::ChannelPyramids> pyr;
    std::vector<RealPlane> luma;
    for (int f = 0; f < 2; ++f) {
      pucolor::PUFrame pu = enc.Encode(frames[f]);
      if (v == 1) pu = hdrmax::Apply(pu, cfg.hdrmax);
      pu = wavelet::SastRescale(pu, factor);
      pyr.push_back(Analyze(pu, cfg.csf));
      luma.push_back(pu.luma);
    }
    features::QualityMaps maps;
    features::SpatialMaps(pyr[1], pyr[1], cfg.vif, maps);
    features::TemporalMaps(pyr[1], pyr[0], pyr[1], pyr[0], cfg.vif, maps);
    nss::MscnConfig mscn;
    mscn.epsilon = 1e-3 * (v == 1 ? hdrmax::OutputRange(cfg.hdrmax) : 1.0);
    const RealPlane m = nss::Mscn(luma[1], mscn).mscn;
    for (int lambda = 1; lambda <= features::kScales; ++lambda) {
      const std::string tag = std::string(kVariantNames[v]) + " scale " + std::to_string(lambda) + " ";
      for (int id = 0; id < features::kNumMaps; ++id) {
        const auto& map = maps[lambda - 1][id];
        if (!map) {
          t.Fail(tag + std::string(features::MapName(static_cast<features::MapId>(id))) + " missing");
          continue;
        }
        const double want = features::IsDistortion(static_cast<features::MapId>(id)) ? 0.0 : 1.0;
        for (double x : map->data())
          t.Near(x, want, 1e-9, tag + std::string(features::MapName(static_cast<features::MapId>(id)))), ++checked;
      }
      const nss::StSimMaps st = nss::LocalStSim(m, m, lambda);
      for (double x : st.fosd.data()) t.Near(x, 0.0, 1e-9, tag + "FOSD"), ++checked;
      for (double x : st.sosd.data()) t.Near(x, 0.0, 1e-9, tag + "SOSD"), ++checked;
    }
  }
  t.Note(std::to_string(checked) + " values");
  return t;
}

Tally Moments() {
  Tally t;
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const RealPlane x = oracle::RandomPlane(64, 64, rng);
    const RealPlane y = oracle::Distort(x, rng, 0.8, 0.1);
    const ComplexPlane cx = oracle::RandomComplexPlane(64, 64, rng);
    const ComplexPlane cy = oracle::Distort(cx, rng, 0.7, 0.1);
    const auto mom = wavelet::BuildMoments(wavelet::HaarAnalyze(x), wavelet::HaarAnalyze(y));
    const auto cmom = wavelet::BuildMoments(wavelet::HaarAnalyze(cx), wavelet::HaarAnalyze(cy));
    for (int lambda = 1; lambda <= wavelet::kLevels; ++lambda)
      for (int j = 0; j < (64 >> lambda); ++j)
        for (int i = 0; i < (64 >> lambda); ++i) {
          const auto o = oracle::PixelMoments(x, y, lambda, i, j);
          const auto& s = mom.scale(lambda);
          t.Near(s.mu_x(i, j), o.mu_x, 1e-9, "mu_x");
          t.Near(s.mu_y(i, j), o.mu_y, 1e-9, "mu_y");
          t.Near(s.var_x(i, j), o.var_x, 1e-9, "var_x");
          t.Near(s.var_y(i, j), o.var_y, 1e-9, "var_y");
          t.Near(s.cov(i, j), o.cov, 1e-9, "cov");
          const auto co = oracle::PixelMoments(cx, cy, lambda, i, j);
          const auto& cs = cmom.scale(lambda);
          t.Near(cs.mu_x(i, j), co.mu_x, 1e-9, "chroma mu_x");
          t.Near(cs.mu_y(i, j), co.mu_y, 1e-9, "chroma mu_y");
          t.Near(cs.var_x(i, j), co.var_x, 1e-9, "chroma var_x");
          t.Near(cs.var_y(i, j), co.var_y, 1e-9, "chroma var_y");
          t.Near(cs.cov(i, j), co.cov, 1e-9, "chroma cov");
        }
  }
  // CSF-weighted moments against the weighted coefficient sums.
  for (int trial = 0; trial < 3; ++trial) {
    const wavelet::CsfWeights w = RandomCsf(rng);
    const RealPlane x = oracle::RandomPlane(64, 64, rng);
    const RealPlane y = oracle::Distort(x, rng, 1.1, 0.2);
    const ComplexPlane cx = oracle::RandomComplexPlane(64, 64, rng);
    const ComplexPlane cy = oracle::Distort(cx, rng, 0.9, 0.2);
    const auto a = wavelet::ChannelClass::kAchromatic;
    const auto mom = wavelet::BuildMoments(wavelet::ApplyCsf(wavelet::HaarAnalyze(x), w, a),
                                           wavelet::ApplyCsf(wavelet::HaarAnalyze(y), w, a));
    const auto cmom = wavelet::BuildMoments(wavelet::ApplyCsf(wavelet::HaarAnalyze(cx), w),
                                            wavelet::ApplyCsf(wavelet::HaarAnalyze(cy), w));
    for (int lambda = 1; lambda <= wavelet::kLevels; ++lambda)
      for (int j = 0; j < (64 >> lambda); j += 3)
        for (int i = 0; i < (64 >> lambda); i += 2) {
          const auto o = oracle::TripleSumMoments(x, y, lambda, i, j, wavelet::kLevels, Fn(w, a));
          t.Near(mom.scale(lambda).var_x(i, j), o.var_x, 1e-9, "weighted var_x");
          t.Near(mom.scale(lambda).cov(i, j), o.cov, 1e-9, "weighted cov");
          const auto co = oracle::TripleSumMoments(cx, cy, lambda, i, j, wavelet::kLevels,
                                                   Fn(w, wavelet::ChannelClass::kRedGreen),
                                                   Fn(w, wavelet::ChannelClass::kBlueYellow));
          t.Near(cmom.scale(lambda).mu_y(i, j), co.mu_y, 1e-9, "weighted chroma mu_y");
          t.Near(cmom.scale(lambda).var_y(i, j), co.var_y, 1e-9, "weighted chroma var_y");
          t.Near(cmom.scale(lambda).cov(i, j), co.cov, 1e-9, "weighted chroma cov");
        }
  }
  return t;
}

template <typename T, typename F>
RealPlane OracleCuts(const Plane<T>& x, const Plane<T>& y, int lambda, const oracle::WeightFn& wr,
                     const oracle::WeightFn& wi, F formula) {
  const int n = x.width() >> lambda;
  RealPlane windows(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      windows(i, j) = formula(oracle::TripleSumMoments(x, y, lambda, i, j, wavelet::kLevels, wr, wi));
  return oracle::CutMeans(windows);
}

void ComparePlanes(Tally& t, const std::optional<RealPlane>& got, const RealPlane& want, const std::string& what) {
  if (!got) return t.Fail(what + " missing");
  if (got->width() != want.width() || got->height() != want.height()) return t.Fail(what + " shape");
  for (size_t i = 0; i < want.size(); ++i) t.Near(got->data()[i], want.data()[i], 1e-7, what);
}

Tally FeatureFormulas() {
  Tally t;
  std::mt19937_64 rng(21);
  auto ssim_mu = [](auto o) { return oracle::SsimMu(o.mu_x, o.mu_y); };
  auto ssim_sigma = [](auto o) { return oracle::SsimSigma(o.var_x, o.var_y, o.cov); };
  auto vif = [](auto o) { return oracle::Vif(o.var_x, o.var_y, o.cov, kSn2); };
  auto rred = [](auto o) { return std::abs(oracle::RredH(o.var_x, kSn2) - oracle::RredH(o.var_y, kSn2)); };
  using features::MapId;
  for (int trial = 0; trial < 3; ++trial) {
    const wavelet::CsfWeights w = RandomCsf(rng);
    const auto wa = Fn(w, wavelet::ChannelClass::kAchromatic);
    const auto wr = Fn(w, wavelet::ChannelClass::kRedGreen);
    const auto wb = Fn(w, wavelet::ChannelClass::kBlueYellow);
    pucolor::PUFrame ref{oracle::RandomPlane(64, 64, rng), oracle::RandomComplexPlane(64, 64, rng)};
    pucolor::PUFrame test{oracle::Distort(ref.luma, rng, 0.85, 0.08), oracle::Distort(ref.chroma, rng, 0.9, 0.05)};
    pucolor::PUFrame ref0{oracle::RandomPlane(64, 64, rng), oracle::RandomComplexPlane(64, 64, rng)};
    pucolor::PUFrame test0{oracle::Distort(ref0.luma, rng, 0.8, 0.1), oracle::Distort(ref0.chroma, rng, 0.8, 0.1)};
    features::QualityMaps maps;
    features::SpatialMaps(Analyze(ref, w), Analyze(test, w), {}, maps);
    features::TemporalMaps(Analyze(ref, w), Analyze(ref0, w), Analyze(test, w), Analyze(test0, w), {}, maps);
    RealPlane dx = ref.luma, dy = test.luma;
    ComplexPlane dcx = ref.chroma, dcy = test.chroma;
    for (size_t i = 0; i < dx.size(); ++i) {
      dx.data()[i] -= ref0.luma.data()[i];
      dy.data()[i] -= test0.luma.data()[i];
      dcx.data()[i] -= ref0.chroma.data()[i];
      dcy.data()[i] -= test0.chroma.data()[i];
    }
    const auto &x = ref.luma, &y = test.luma;
    const auto &cx = ref.chroma, &cy = test.chroma;
    for (int lambda = 1; lambda <= features::kScales; ++lambda) {
      const auto& m = maps[lambda - 1];
      auto get = [&](MapId id) -> const std::optional<RealPlane>& { return m[static_cast<int>(id)]; };
      const std::string s = " scale " + std::to_string(lambda);
      ComparePlanes(t, get(MapId::kLSsimMu), OracleCuts(x, y, lambda, wa, wa, ssim_mu), "L-SSIM_mu" + s);
      ComparePlanes(t, get(MapId::kLSsimSigma), OracleCuts(x, y, lambda, wa, wa, ssim_sigma), "L-SSIM_sigma" + s);
      ComparePlanes(t, get(MapId::kCSsimMu), OracleCuts(cx, cy, lambda, wr, wb, ssim_mu), "C-SSIM_mu" + s);
      ComparePlanes(t, get(MapId::kCSsimSigma), OracleCuts(cx, cy, lambda, wr, wb, ssim_sigma), "C-SSIM_sigma" + s);
      ComparePlanes(t, get(MapId::kLVif), OracleCuts(x, y, lambda, wa, wa, vif), "L-VIF" + s);
      ComparePlanes(t, get(MapId::kCVif), OracleCuts(cx, cy, lambda, wr, wb, vif), "C-VIF" + s);
      ComparePlanes(t, get(MapId::kLSRred), OracleCuts(x, y, lambda, wa, wa, rred), "L-SRRED" + s);
      ComparePlanes(t, get(MapId::kCSRred), OracleCuts(cx, cy, lambda, wr, wb, rred), "C-SRRED" + s);
      ComparePlanes(t, get(MapId::kDlm), oracle::Dlm(x, y, lambda, wa), "DLM" + s);
      ComparePlanes(t, get(MapId::kLTVif), OracleCuts(dx, dy, lambda, wa, wa, vif), "L-TVIF" + s);
      ComparePlanes(t, get(MapId::kCTVif), OracleCuts(dcx, dcy, lambda, wr, wb, vif), "C-TVIF" + s);
      ComparePlanes(t, get(MapId::kLTRred), OracleCuts(dx, dy, lambda, wa, wa, rred), "L-TRRED" + s);
      ComparePlanes(t, get(MapId::kCTRred), OracleCuts(dcx, dcy, lambda, wr, wb, rred), "C-TRRED" + s);
    }
  }
  return t;
}

Tally Kl() {
  Tally t;
  std::mt19937_64 rng(36);
  std::uniform_real_distribution<double> alpha(nss::kMinShape, nss::kMaxShape), log_b(std::log(0.1), std::log(10.0));
  auto b = [&] { return std::exp(log_b(rng)); };
  // Absolute 1e-4, relative once the divergence exceeds 1.
  auto check = [&](double got, double want, const std::string& what) {
    const double scale = std::max(1.0, std::abs(want));
    t.Near(got / scale, want / scale, 1e-4, what);
  };
  for (int i = 0; i < 200; ++i) {
    const nss::GgdParams p{alpha(rng), b()}, q{alpha(rng), b()};
    const double want = oracle::QuadratureKl(p.alpha, p.b, p.b, q.alpha, q.b, q.b);
    check(nss::Fosd(p, q), want, "fosd pair " + std::to_string(i));
  }
  for (int i = 0; i < 200; ++i) {
    const nss::AggdParams p{alpha(rng), b(), b()}, q{alpha(rng), b(), b()};
    const double want = oracle::QuadratureKl(p.alpha, p.b_l, p.b_r, q.alpha, q.b_l, q.b_r);
    check(nss::Sosd(p, q), want, "sosd pair " + std::to_string(i));
  }
  std::uniform_real_distribution<double> gb(0.1, 5.0);
  for (int i = 0; i < 200; ++i) {
    const double b1 = gb(rng), b2 = gb(rng);
    const double want = oracle::GaussianKl(b1 / std::sqrt(2.0), b2 / std::sqrt(2.0));
    t.Near(nss::Fosd({2.0, b1}, {2.0, b2}), want, 1e-9, "gaussian fosd");
    t.Near(nss::Sosd({2.0, b1, b1}, {2.0, b2, b2}), want, 1e-9, "gaussian sosd");
  }
  return t;
}

Tally Fits() {
  Tally t;
  std::mt19937_64 rng(31);
  auto rel = [&](double got, double want, double tol, const std::string& what) {
    t.Near(got / want, 1.0, tol, what);
  };
  for (auto [a, b] : {std::pair{0.6, 1.3}, std::pair{1.0, 0.5}, std::pair{2.5, 2.0}, std::pair{4.0, 0.8}}) {
    const auto s = oracle::SampleGgd(a, b, 1000000, rng);
    const nss::GgdParams fit = nss::FitGgd(s);
    rel(fit.alpha, a, 0.03, "ggd alpha " + FormatDouble(a));
    rel(fit.b, b, 0.03, "ggd b " + FormatDouble(a));
  }
  for (auto [a, bl, br] : {std::tuple{1.5, 0.8, 1.6}, std::tuple{0.8, 1.0, 0.5}, std::tuple{3.0, 2.0, 2.5}}) {
    const auto s = oracle::SampleAggd(a, bl, br, 1000000, rng);
    const nss::AggdParams fit = nss::FitAggd(s);
    rel(fit.alpha, a, 0.03, "aggd alpha " + FormatDouble(a));
    rel(fit.b_l, bl, 0.03, "aggd b_l " + FormatDouble(a));
    rel(fit.b_r, br, 0.03, "aggd b_r " + FormatDouble(a));
  }
  std::normal_distribution<double> normal(0.0, 1.3);
  std::vector<double> g(1000000);
  for (double& v : g) v = normal(rng);
  rel(nss::FitGgd(g).alpha, 2.0, 0.02, "gaussian ggd alpha");
  rel(nss::FitAggd(g).alpha, 2.0, 0.02, "gaussian aggd alpha");
  return t;
}

Tally PuColor() {
  Tally t;
  using namespace pucolor;
  const auto basis = ChromaticBasis::FromDkl(pu_fixture::SomeDkl());
  const auto grid = LogSpace(1e-4, 1e4, 33);
  const double k = 2.5;
  const auto constant = IntegratePu(ThresholdModel::Constant(k), basis, grid);
  const auto weber = IntegratePu(ThresholdModel::Weber(0.02), basis, grid);
  for (int c = 0; c < 3; ++c)
    for (size_t i = 0; i < grid.size(); ++i) {
      const double cw = k * basis.direction(c).norm() * (1 - kLambdaFloor);
      t.Near(constant.values[c][i] / cw, 1.0, 1e-6, "constant closed form");
      const double ww = basis.direction(c).norm() * std::log(1.0 / kLambdaFloor) / (0.02 * grid[i]);
      t.Near(weber.values[c][i] / ww, 1.0, 1e-6, "weber closed form");
    }

  const ThresholdModel models[] = {ThresholdModel::Constant(3.0),        ThresholdModel::Weber(0.01),
                                   ThresholdModel::DeVriesRose(0.01),    ThresholdModel::WeberFloor(0.01, 1.0),
                                   pu_fixture::SyntheticTable(),         pu_fixture::SquareRootTable()};
  const char* names[] = {"constant", "weber", "devries_rose", "weber_floor", "saturating table", "square-root table"};
  const auto fit_grid = LogSpace(1e-4, 1e4, 120);
  double min_r2 = 1;
  for (int m = 0; m < 6; ++m) {
    const auto tables = IntegratePu(models[m], basis, fit_grid);
    for (int c = 0; c < 3; ++c) {
      double r2 = 0;
      try {
        r2 = FitNonlinearity(fit_grid, tables.values[c]).r2;
      } catch (const FitFailure& e) {
        r2 = e.best().r2;
      }
      min_r2 = std::min(min_r2, r2);
      t.True(r2 > 0.999, std::string(names[m]) + " r2 " + FormatDouble(r2));
    }
  }
  t.Note("min r2 " + FormatDouble(min_r2));

  const auto shipped = PUCalibration::Load(CUTFUNQUE_DATA_DIR "/calibration_default.json");
  const double lut_shipped = pu_fixture::LutQuadratureDeviation(shipped);
  t.True(lut_shipped < 0.01, "shipped calibration LUT deviation " + FormatDouble(lut_shipped));
  double lut_worst = lut_shipped;
  for (const auto& model : {ThresholdModel::Constant(2.0), ThresholdModel::DeVriesRose(0.02), pu_fixture::SquareRootTable()}) {
    const double d = pu_fixture::LutQuadratureDeviation(Calibrate(model, DefaultXyzToLms(), 1e-4, 1e4, 80));
    t.True(d < 0.01, "oracle calibration LUT deviation " + FormatDouble(d));
    lut_worst = std::max(lut_worst, d);
  }
  t.Note("LUT vs quadrature max relative " + FormatDouble(lut_worst));
  return t;
}

Tally Hdrmax() {
  Tally t;
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> gain(0.1, 10), offset(-5, 5);
  for (int trial = 0; trial < 100; ++trial) {
    const RealPlane p = oracle::RandomPlane(24, 20, rng);
    const double a = gain(rng), b = offset(rng);
    RealPlane q = p, n = p;
    for (double& v : q.data()) v = a * v + b;
    for (double& v : n.data()) v = -v;
    const RealPlane x = hdrmax::Apply(p), y = hdrmax::Apply(q), z = hdrmax::Apply(n);
    for (size_t i = 0; i < x.size(); ++i) {
      t.Near(y.data()[i], x.data()[i], 1e-9 * (1 + std::abs(x.data()[i])), "affine");
      t.Near(z.data()[i], -x.data()[i], 1e-12 * (1 + std::abs(x.data()[i])), "odd");
    }
  }
  for (int trial = 0; trial < 20; ++trial) {
    const RealPlane p = oracle::RandomPlane(5 + trial * 3, 40 - trial, rng, -3, 3);
    for (int window : {1, 3, 17}) {
      t.True(hdrmax::SlidingMin(p, window) == oracle::SlidingExtremum(p, window, false), "sliding min");
      t.True(hdrmax::SlidingMax(p, window) == oracle::SlidingExtremum(p, window, true), "sliding max");
    }
  }
  return t;
}

Tally Binning() {
  Tally t;
  using binning::Measure;
  binning::BinConfig cfg;
  for (Measure m : binning::kMeasures)
    for (int b = 0; b < binning::kBins; ++b) {
      const double c = cfg.Center(m, b), half = cfg.Width(m) / 2;
      t.True(binning::Membership(c, cfg, m, b) == 1.0, "membership at center");
      t.True(binning::Membership(c - half, cfg, m, b) == std::exp(-0.5), "membership at half-width");
      t.True(binning::Membership(c + half, cfg, m, b) == std::exp(-0.5), "membership at half-width");
    }

  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const RealPlane map = oracle::RandomPlane(7, 5, rng, 0.2, 1.0);
    const RealPlane w = oracle::RandomPlane(7, 5, rng, 0.0, 1.0);
    double sw = 0, swm = 0, swd = 0;
    for (size_t i = 0; i < map.size(); ++i) {
      sw += w.data()[i];
      swm += w.data()[i] * map.data()[i];
      swd += w.data()[i] * std::pow(1 - map.data()[i], 3);
    }
    t.Near(*binning::Aggregate(map, w, false), swm / sw, 1e-14, "weighted mean");
    t.Near(*binning::Aggregate(map, w, true), 1 - std::cbrt(swd / sw), 1e-14, "minkowski");

    std::array<std::optional<double>, binning::kBins> bins;
    double lo = HUGE_VAL, hi = -HUGE_VAL;
    for (auto& b : bins) {
      b = u(rng);
      lo = std::min(lo, *b);
      hi = std::max(hi, *b);
    }
    for (bool distortion : {false, true}) {
      const double worst = *binning::WorstBin(bins, distortion);
      t.True(worst >= lo && worst <= hi, "worst bin within extremes");
      t.True(worst == (distortion ? hi : lo), "worst bin picks the extreme");
    }
  }

  const FeatureManifest manifest = FeatureManifest::Canonical();
  const auto frames = fixture::ToLinear(fixture::MovingScene(128, 96, 6));
  const auto noisy = fixture::ToLinear(fixture::AddNoise(fixture::MovingScene(128, 96, 6), 0.02, 5));
  std::vector<ExtractionResult> runs;
  for (int workers : {1, 4}) {
    MemorySource ref(frames), test(noisy);
    runs.push_back(FeatureExtractor(DefaultConfig(workers), manifest).Run(ref, test));
  }
  t.True(manifest.size() == 232, "manifest count " + std::to_string(manifest.size()));
  t.True(FeatureManifest::Load(CUTFUNQUE_DATA_DIR "/manifest.json").Hash() == manifest.Hash(), "shipped manifest");
  auto same = [](const FeatureVector& a, const FeatureVector& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
      if (a[i].has_value() != b[i].has_value()) return false;
      if (a[i] && std::memcmp(&*a[i], &*b[i], sizeof(double)) != 0) return false;
    }
    return true;
  };
  for (const auto& r : runs) {
    t.True(r.video.size() == manifest.size(), "video vector length");
    for (const auto& f : r.frames) t.True(f.size() == manifest.size(), "frame vector length");
  }
  t.True(runs[0].frames.size() == runs[1].frames.size(), "frame count across workers");
  for (size_t f = 0; f < runs[0].frames.size(); ++f)
    t.True(same(runs[0].frames[f], runs[1].frames[f]), "frame " + std::to_string(f) + " differs across workers");
  t.True(same(runs[0].video, runs[1].video), "video vector differs across workers");
  return t;
}

Tally Monotonicity() {
  Tally t;
  const FeatureManifest manifest = FeatureManifest::Canonical();
  const FeatureExtractor ex(DefaultConfig(4), manifest);
  const auto scene = fixture::MovingScene(128, 128, 4);
  MemorySource ref(fixture::ToLinear(scene));
  const double sigmas[] = {0.002, 0.005, 0.01, 0.02, 0.04};
  std::vector<FeatureVector> video;
  for (double sigma : sigmas) {
    MemorySource test(fixture::ToLinear(fixture::AddNoise(scene, sigma, 99)));
    video.push_back(ex.Run(ref, test).video);
  }
  int tracked = 0;
  for (size_t i = 0; i < manifest.size(); ++i) {
    const auto& e = manifest.entries()[i];
    const bool mean = e.aggregation == "mean" || e.aggregation == "global";
    const bool falls = e.name.find("SSIM") != std::string::npos || e.name.find("DLM") != std::string::npos;
    const bool rises = e.name.find("RRED") != std::string::npos || e.name.find("FOSD") != std::string::npos;
    if (!mean || !(falls || rises)) continue;
    ++tracked;
    for (size_t k = 1; k < video.size(); ++k) {
      const double prev = *video[k - 1][i], cur = *video[k][i];
      const std::string what = e.name + " at noise " + FormatDouble(sigmas[k - 1]) + " -> " +
                               FormatDouble(sigmas[k]) + ": " + FormatDouble(prev) + " -> " + FormatDouble(cur);
      t.True(falls ? cur <= prev : cur >= prev, what);
    }
  }
  t.Note(std::to_string(tracked) + " aggregates over 5 noise levels");
  return t;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Tally()>>> criteria = {
      {"identity", Identity},
      {"moment-oracle", Moments},
      {"feature-formula-oracle", FeatureFormulas},
      {"kl-correctness", Kl},
      {"distribution-fit-recovery", Fits},
      {"pucolor-calibration", PuColor},
      {"hdrmax", Hdrmax},
      {"binning", Binning},
      {"monotonicity", Monotonicity},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Tally t;
    try {
      t = run();
    } catch (const std::exception& e) {
      t.Fail(std::string("exception: ") + e.what());
    }
    failed += !t.ok();
    std::cout << (t.ok() ? "PASS " : "FAIL ") << name << " (" << t.Summary() << ")" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
