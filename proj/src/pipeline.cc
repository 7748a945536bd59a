#include "cutfunque/pipeline.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "cutfunque/error.h"
#include "cutfunque/nss.h"

namespace cutfunque {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

}  // namespace

void ParallelFor(int n, int workers, const std::function<void(int)>& fn) {
  const int threads = std::clamp(workers, 1, std::max(n, 1));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

VideoFileSource::VideoFileSource(const std::filesystem::path& path, const VideoSpec& spec,
                                 const Eigen::Matrix3d& xyz_to_lms)
    : reader_(VideoReader::Open(path, spec)), xyz_to_lms_(xyz_to_lms) {}

LinearFrame VideoFileSource::Read(int index) {
  return DecodeToLinear(reader_.ReadFrame(index), reader_.spec(), xyz_to_lms_);
}

// Everything computable from one frame pair alone.
struct FeatureExtractor::Spatial {
  struct Variant {
    features::ChannelPyramids ref, test;
    VariantFrame frame;
  };
  std::array<Variant, kVariants> variants;
  RealPlane plain_ref_luma;
};

FeatureExtractor::FeatureExtractor(ExtractorConfig config, FeatureManifest manifest)
    : config_(std::move(config)), manifest_(std::move(manifest)), encoder_(config_.calibration) {}

std::shared_ptr<const FeatureExtractor::Spatial> FeatureExtractor::ProcessSpatial(const LinearFrame& ref_lin,
                                                                                 const LinearFrame& test_lin) const {
  const LinearFrame test_scaled = RescaleToReference(test_lin, ref_lin.width(), ref_lin.height());
  const pucolor::PUFrame ref_pu = encoder_.Encode(ref_lin);
  const pucolor::PUFrame test_pu = encoder_.Encode(test_scaled);
  const double factor = wavelet::SastFactor(config_.viewing, ref_lin.height());

  auto out = std::make_shared<Spatial>();
  for (int v = 0; v < kVariants; ++v) {
    const bool hdr = v == 1;
    const pucolor::PUFrame ref = wavelet::SastRescale(hdr ? hdrmax::Apply(ref_pu, config_.hdrmax) : ref_pu, factor);
    const pucolor::PUFrame test =
        wavelet::SastRescale(hdr ? hdrmax::Apply(test_pu, config_.hdrmax) : test_pu, factor);
    if (!hdr) out->plain_ref_luma = ref.luma;

    auto& variant = out->variants[v];
    auto pyramids = [&](const pucolor::PUFrame& f) {
      return features::ChannelPyramids{
          wavelet::ApplyCsf(wavelet::HaarAnalyze(f.luma), config_.csf, wavelet::ChannelClass::kAchromatic),
          wavelet::ApplyCsf(wavelet::HaarAnalyze(f.chroma), config_.csf)};
    };
    variant.ref = pyramids(ref);
    variant.test = pyramids(test);
    features::SpatialMaps(variant.ref, variant.test, config_.vif, variant.frame.maps);

    nss::MscnConfig mscn;
    mscn.epsilon = 1e-3 * (hdr ? hdrmax::OutputRange(config_.hdrmax) : 1.0);
    const nss::MscnPlanes ref_mscn = nss::Mscn(ref.luma, mscn);
    const nss::MscnPlanes test_mscn = nss::Mscn(test.luma, mscn);
    for (int lambda = 1; lambda <= binning::kScales; ++lambda)
      variant.frame.stsim[lambda - 1] = nss::LocalStSim(ref_mscn.mscn, test_mscn.mscn, lambda);
    variant.frame.global_nss = nss::GlobalNss(test.luma, mscn);
    variant.frame.global_fosd = nss::Fosd(nss::FitGgdOrFallback(ref_mscn.mscn.data()),
                                          nss::FitGgdOrFallback(test_mscn.mscn.data()));
  }
  return out;
}

ExtractionResult FeatureExtractor::Run(FrameSource& ref, FrameSource& test, int first, int last) const {
  const auto start = Clock::now();
  const int available = std::min(ref.FrameCount(), test.FrameCount());
  if (last < 0) last = available;
  if (first < 0 || first >= last || last > available)
    throw ConfigError("cli", "frame range " + std::to_string(first) + ":" + std::to_string(last) +
                                 " is outside the " + std::to_string(available) + " available frames");
  const int count = last - first;
  const int workers = std::max(1, config_.workers);
  const int batch = std::max(4, 2 * workers);

  ExtractionResult result;
  result.frames.resize(count);
  double decode_time = 0, spatial_time = 0, temporal_time = 0;

  std::shared_ptr<const Spatial> previous;
  FrameRing<RealPlane> ring(4);
  for (int base = 0; base < count; base += batch) {
    const int n = std::min(batch, count - base);
    auto t0 = Clock::now();
    std::vector<LinearFrame> refs, tests;
    for (int i = 0; i < n; ++i) {
      refs.push_back(ref.Read(first + base + i));
      tests.push_back(test.Read(first + base + i));
    }
    decode_time += Seconds(t0);

    t0 = Clock::now();
    std::vector<std::shared_ptr<const Spatial>> spatial(n);
    ParallelFor(n, workers, [&](int i) { spatial[i] = ProcessSpatial(refs[i], tests[i]); });
    spatial_time += Seconds(t0);

    // Ordered stage: snapshot the temporal context of every frame.
    std::vector<std::shared_ptr<const Spatial>> prev(n);
    std::vector<std::vector<std::shared_ptr<const RealPlane>>> buffers(n);
    for (int i = 0; i < n; ++i) {
      prev[i] = previous;
      ring.Push(std::make_shared<const RealPlane>(spatial[i]->plain_ref_luma));
      buffers[i].assign(ring.frames().begin(), ring.frames().end());
      previous = spatial[i];
    }

    t0 = Clock::now();
    ParallelFor(n, workers, [&](int i) {
      const Spatial& cur = *spatial[i];
      FrameData data;
      std::vector<const RealPlane*> lumas;
      for (const auto& p : buffers[i]) lumas.push_back(p.get());
      for (int lambda = 1; lambda <= binning::kScales; ++lambda) {
        binning::SpatialMeasures(cur.plain_ref_luma, lambda, data.measures[lambda - 1]);
        binning::TemporalMeasure(lumas, lambda, data.measures[lambda - 1]);
      }
      for (int v = 0; v < kVariants; ++v) {
        data.variants[v] = cur.variants[v].frame;
        if (prev[i]) {
          const auto& p = prev[i]->variants[v];
          features::TemporalMaps(cur.variants[v].ref, p.ref, cur.variants[v].test, p.test, config_.vif,
                                 data.variants[v].maps);
        }
      }
      result.frames[base + i] = AssembleFrame(data, manifest_, config_.bins);
    });
    temporal_time += Seconds(t0);
  }

  for (int i = 0; i < count; ++i) result.frame_indices.push_back(first + i);
  result.video = PoolFrames(result.frames);
  result.timings_seconds = {{"decode", decode_time},
                            {"spatial", spatial_time},
                            {"temporal_and_assembly", temporal_time},
                            {"total", Seconds(start)}};
  return result;
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

void WriteFeatureCsv(std::ostream& out, const FeatureManifest& manifest, const ExtractionResult& result) {
  out << "frame";
  for (const auto& d : manifest.entries()) out << ',' << d.name;
  out << '\n';
  auto row = [&](const std::string& label, const FeatureVector& values) {
    out << label;
    for (const auto& v : values) {
      out << ',';
      if (v) out << FormatDouble(*v);
    }
    out << '\n';
  };
  for (size_t i = 0; i < result.frames.size(); ++i) row(std::to_string(result.frame_indices[i]), result.frames[i]);
  row("video", result.video);
}

}  // namespace cutfunque
