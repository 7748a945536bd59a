// cutfunque: feature extraction, prediction and PUColor calibration.
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cutfunque/error.h"
#include "cutfunque/manifest.h"
#include "cutfunque/model.h"
#include "cutfunque/pipeline.h"
#include "cutfunque/pucolor.h"
#include "json.hpp"

namespace {

using namespace cutfunque;

struct RunOptions {
  std::string ref, test, ref_spec, test_spec, out, model, frames;
  std::string calib = std::string(CUTFUNQUE_DATA_DIR) + "/calibration_default.json";
  std::string csf = std::string(CUTFUNQUE_DATA_DIR) + "/csf_watson.json";
  double viewing = 3.0;
  int workers = 1;
};

std::pair<int, int> ParseFrames(const std::string& text) {
  if (text.empty()) return {0, -1};
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(text);
    const int a = colon == 0 ? 0 : std::stoi(text.substr(0, colon));
    const int b = colon + 1 == text.size() ? -1 : std::stoi(text.substr(colon + 1));
    return {a, b};
  } catch (const std::exception&) {
    throw ConfigError("cli", "--frames expects A:B, got '" + text + "'");
  }
}

ExtractionResult Extract(const RunOptions& o, const FeatureManifest& manifest) {
  ExtractorConfig cfg;
  cfg.calibration = pucolor::PUCalibration::Load(o.calib);
  cfg.csf = wavelet::CsfWeights::Load(o.csf);
  cfg.viewing.distance_heights = o.viewing;
  cfg.workers = o.workers;
  const VideoSpec ref_spec = VideoSpec::Parse(o.ref_spec);
  const VideoSpec test_spec = VideoSpec::Parse(o.test_spec);
  VideoFileSource ref(o.ref, ref_spec, cfg.calibration.xyz_to_lms);
  VideoFileSource test(o.test, test_spec, cfg.calibration.xyz_to_lms);
  const auto [first, last] = ParseFrames(o.frames);
  FeatureExtractor extractor(std::move(cfg), manifest);
  return extractor.Run(ref, test, first, last);
}

void AddRunOptions(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--ref", o.ref, "Reference video (.yuv or .y4m)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--test", o.test, "Test video (.yuv or .y4m)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--ref-spec", o.ref_spec, "Reference layout, e.g. w=1920,h=1080,bits=10,tf=pq,gamut=bt2020");
  cmd->add_option("--test-spec", o.test_spec, "Test layout");
  cmd->add_option("--calib", o.calib, "PUColor calibration JSON")->capture_default_str();
  cmd->add_option("--csf", o.csf, "Wavelet CSF weight JSON")->capture_default_str();
  cmd->add_option("--frames", o.frames, "Half-open frame range A:B");
  cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--viewing", o.viewing, "Viewing distance in display heights")->capture_default_str();
}

int RunFeatures(const RunOptions& o) {
  const FeatureManifest manifest = FeatureManifest::Canonical();
  const ExtractionResult result = Extract(o, manifest);
  if (o.out.empty() || o.out == "-") {
    WriteFeatureCsv(std::cout, manifest, result);
  } else {
    std::ofstream out(o.out);
    if (!out) throw ConfigError("cli", "cannot write " + o.out);
    WriteFeatureCsv(out, manifest, result);
  }
  return 0;
}

int RunPredict(const RunOptions& o) {
  const FeatureManifest manifest = FeatureManifest::Canonical();
  const QualityModel model = QualityModel::Load(o.model);
  if (model.manifest_hash() != manifest.Hash())
    throw PredictionError("model manifest hash " + model.manifest_hash() + " does not match runtime manifest " +
                          manifest.Hash());
  const ExtractionResult result = Extract(o, manifest);
  const auto start = std::chrono::steady_clock::now();
  const double score = model.Predict(result.video, manifest);
  auto timings = result.timings_seconds;
  timings["predict"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << FormatDouble(score) << "\n";
  if (!o.out.empty()) {
    nlohmann::json report = {{"score", score},
                             {"frames", result.frames.size()},
                             {"model_hash", model.manifest_hash()},
                             {"timings_seconds", timings}};
    std::ofstream out(o.out);
    if (!out) throw ConfigError("cli", "cannot write " + o.out);
    out << report.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cut-FUNQUE quality features for tone-mapped HDR video"};
  app.require_subcommand(1);

  RunOptions features_opts;
  auto* features = app.add_subcommand("features", "Write per-frame and per-video features as CSV");
  AddRunOptions(features, features_opts);
  features->add_option("--out", features_opts.out, "Output CSV (default stdout)");

  RunOptions predict_opts;
  auto* predict = app.add_subcommand("predict", "Predict a quality score with a trained model");
  AddRunOptions(predict, predict_opts);
  predict->add_option("--model", predict_opts.model, "Model JSON")->required()->check(CLI::ExistingFile);
  predict->add_option("--out", predict_opts.out, "JSON report");

  std::string threshold_path, calib_out;
  double y_min = 1e-4, y_max = 1e4;
  int samples = 200;
  auto* calibrate = app.add_subcommand("calibrate", "Fit the PUColor nonlinearities for a threshold model");
  calibrate->add_option("--threshold-model", threshold_path, "Threshold model JSON")
      ->required()
      ->check(CLI::ExistingFile);
  calibrate->add_option("--out", calib_out, "Calibration JSON")->required();
  calibrate->add_option("--y-min", y_min, "Lowest luminance (nits)")->capture_default_str();
  calibrate->add_option("--y-max", y_max, "Highest luminance (nits)")->capture_default_str();
  calibrate->add_option("--samples", samples, "Luminance samples")->capture_default_str();

  std::string manifest_out;
  auto* manifest_cmd = app.add_subcommand("manifest", "Write the feature manifest JSON");
  manifest_cmd->add_option("--out", manifest_out, "Output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*features) return RunFeatures(features_opts);
    if (*predict) return RunPredict(predict_opts);
    if (*calibrate) {
      std::ifstream in(threshold_path);
      const auto model = pucolor::ThresholdModel::FromJson(nlohmann::json::parse(in));
      const auto calibration = pucolor::Calibrate(model, DefaultXyzToLms(), y_min, y_max, samples);
      calibration.Save(calib_out);
      std::cout << "r2: " << calibration.r2[0] << " " << calibration.r2[1] << " " << calibration.r2[2] << "\n";
      return 0;
    }
    if (*manifest_cmd) {
      const std::string text = FeatureManifest::Canonical().ToJson().dump(2) + "\n";
      if (manifest_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream(manifest_out) << text;
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
