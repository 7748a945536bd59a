#ifndef CUTFUNQUE_VIDEO_IO_H_
#define CUTFUNQUE_VIDEO_IO_H_

#include <Eigen/Core>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cutfunque/plane.h"

namespace cutfunque {

enum class ChromaSubsampling { k420, k444 };
enum class Transfer { kPq, kHlg, kBt1886 };
enum class Gamut { kBt709, kBt2020 };

// Stream layout and colorimetry. Zero width/height/bit_depth and an empty
// chroma field mean "take it from the y4m header".
struct VideoSpec {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  std::optional<ChromaSubsampling> chroma;
  Transfer transfer = Transfer::kBt1886;
  Gamut gamut = Gamut::kBt709;
  double frame_rate = 24.0;
  double peak_luminance = 100.0;
  bool full_range = false;

  // Parses "w=1920,h=1080,bits=10,chroma=420,tf=pq,gamut=bt2020,peak=1000,range=full,fps=24".
  // Missing peak defaults to 1000 nits for HLG/PQ and 100 nits for BT.1886.
  static VideoSpec Parse(std::string_view text);
  std::string ToString() const;

  // Throws ConfigError unless the layout is complete and self-consistent.
  void Validate() const;

  int MaxCode() const { return (1 << bit_depth) - 1; }
  size_t FrameBytes() const;
};

// One decoded frame of integer code values, chroma already upsampled to 4:4:4.
struct RawFrame {
  Plane<uint16_t> y;
  Plane<uint16_t> cb;
  Plane<uint16_t> cr;
};

// Per-pixel cone responses scaled so that l + m is luminance in nits.
struct LinearFrame {
  RealPlane l;
  RealPlane m;
  RealPlane s;

  int width() const { return l.width(); }
  int height() const { return l.height(); }
};

// Reads planar YCbCr frames from a raw .yuv stream or a .y4m stream.
class VideoReader {
 public:
  // The stream is sniffed for the "YUV4MPEG2" magic; otherwise it is raw
  // and `spec` must carry the full layout.
  VideoReader(std::unique_ptr<std::istream> stream, const VideoSpec& spec);

  static VideoReader Open(const std::filesystem::path& path, const VideoSpec& spec);

  const VideoSpec& spec() const { return spec_; }
  bool is_y4m() const { return is_y4m_; }
  int FrameCount();

  RawFrame ReadFrame(int index);

 private:
  void ParseY4mHeader(const VideoSpec& requested);
  long long FrameOffset(int index);

  std::unique_ptr<std::istream> stream_;
  VideoSpec spec_;
  bool is_y4m_ = false;
  long long stream_size_ = 0;
  long long data_start_ = 0;
  std::vector<long long> y4m_offsets_;
};

// Reads frame `index` of a raw planar stream laid out per `spec`.
RawFrame ReadRawFrame(std::istream& stream, const VideoSpec& spec, int index);

// Unpacks one frame payload (planar, little-endian for > 8 bits).
RawFrame UnpackFrame(std::span<const uint8_t> payload, const VideoSpec& spec,
                     long long base_offset);

Eigen::Matrix3d RgbToXyz(Gamut gamut);

// Hunt-Pointer-Estevez cone matrix with rows renormalised so that D65 white
// gives L = M = S = Y / 2.
Eigen::Matrix3d DefaultXyzToLms();

LinearFrame DecodeToLinear(const RawFrame& frame, const VideoSpec& spec,
                           const Eigen::Matrix3d& xyz_to_lms);

// Bilinear resample of every plane; identity when dimensions already match.
LinearFrame RescaleToReference(const LinearFrame& test, int width, int height);

// Ring of the most recent frames, oldest first.
template <typename Frame>
class FrameRing {
 public:
  explicit FrameRing(size_t capacity) : capacity_(capacity) {}

  void Push(std::shared_ptr<const Frame> frame) {
    frames_.push_back(std::move(frame));
    if (frames_.size() > capacity_) frames_.pop_front();
  }

  size_t size() const { return frames_.size(); }
  size_t capacity() const { return capacity_; }
  bool empty() const { return frames_.empty(); }
  const Frame& newest() const { return *frames_.back(); }
  // Frame `age` steps back from the newest (0 = newest); null if unavailable.
  std::shared_ptr<const Frame> Back(size_t age) const {
    if (age >= frames_.size()) return nullptr;
    return frames_[frames_.size() - 1 - age];
  }
  const std::deque<std::shared_ptr<const Frame>>& frames() const { return frames_; }

 private:
  size_t capacity_;
  std::deque<std::shared_ptr<const Frame>> frames_;
};

std::string_view ToString(Transfer transfer);
std::string_view ToString(Gamut gamut);

}  // namespace cutfunque

#endif  // CUTFUNQUE_VIDEO_IO_H_
