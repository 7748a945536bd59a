#ifndef CUTFUNQUE_PIPELINE_H_
#define CUTFUNQUE_PIPELINE_H_

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "cutfunque/binning.h"
#include "cutfunque/hdrmax.h"
#include "cutfunque/manifest.h"
#include "cutfunque/pucolor.h"
#include "cutfunque/video_io.h"
#include "cutfunque/wavelet.h"
#include "cutfunque/wavelet_features.h"

namespace cutfunque {

struct ExtractorConfig {
  pucolor::PUCalibration calibration;
  wavelet::CsfWeights csf = wavelet::CsfWeights::Ones();
  wavelet::ViewingConfig viewing;
  hdrmax::Config hdrmax;
  features::VifConfig vif;
  binning::BinConfig bins;
  int workers = 1;
};

// Produces linear frames in display order.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual int FrameCount() = 0;
  virtual LinearFrame Read(int index) = 0;
};

class VideoFileSource : public FrameSource {
 public:
  VideoFileSource(const std::filesystem::path& path, const VideoSpec& spec,
                  const Eigen::Matrix3d& xyz_to_lms);
  int FrameCount() override { return reader_.FrameCount(); }
  LinearFrame Read(int index) override;

 private:
  VideoReader reader_;
  Eigen::Matrix3d xyz_to_lms_;
};

class MemorySource : public FrameSource {
 public:
  explicit MemorySource(std::vector<LinearFrame> frames) : frames_(std::move(frames)) {}
  int FrameCount() override { return static_cast<int>(frames_.size()); }
  LinearFrame Read(int index) override { return frames_.at(index); }

 private:
  std::vector<LinearFrame> frames_;
};

struct ExtractionResult {
  std::vector<int> frame_indices;
  std::vector<FeatureVector> frames;
  FeatureVector video;
  std::map<std::string, double> timings_seconds;
};

class FeatureExtractor {
 public:
  FeatureExtractor(ExtractorConfig config, FeatureManifest manifest);

  const FeatureManifest& manifest() const { return manifest_; }
  const ExtractorConfig& config() const { return config_; }

  // Frames [first, last) of both sources; last < 0 means "to the end of the
  // shorter source". Temporal features are absent on the first frame.
  ExtractionResult Run(FrameSource& ref, FrameSource& test, int first = 0, int last = -1) const;

 private:
  struct Spatial;
  std::shared_ptr<const Spatial> ProcessSpatial(const LinearFrame& ref, const LinearFrame& test) const;

  ExtractorConfig config_;
  FeatureManifest manifest_;
  pucolor::PUEncoder encoder_;
};

// Runs fn(i) for i in [0, n) on up to `workers` threads.
void ParallelFor(int n, int workers, const std::function<void(int)>& fn);

// Shortest round-trip decimal representation.
std::string FormatDouble(double v);

// Header row, one row per frame, then a "video" row; absent values are empty.
void WriteFeatureCsv(std::ostream& out, const FeatureManifest& manifest, const ExtractionResult& result);

}  // namespace cutfunque

#endif  // CUTFUNQUE_PIPELINE_H_
