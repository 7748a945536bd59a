#include <cctype>
#include "cutfunque/video_io.h"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cutfunque/error.h"
#include "cutfunque/transfer.h"

namespace cutfunque {
namespace {

constexpr std::string_view kY4mMagic = "YUV4MPEG2";
constexpr std::string_view kY4mFrame = "FRAME";

double ParseDouble(std::string_view key, std::string_view value) {
  double out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("video_io", "bad number for '" + std::string(key) + "': " + std::string(value));
  return out;
}

int ParseInt(std::string_view key, std::string_view value) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("video_io", "bad integer for '" + std::string(key) + "': " + std::string(value));
  return out;
}

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

struct LumaCoefficients {
  double kr;
  double kb;
  double kg() const { return 1.0 - kr - kb; }
};

LumaCoefficients Coefficients(Gamut gamut) {
  switch (gamut) {
    case Gamut::kBt709:
      return {0.2126, 0.0722};
    case Gamut::kBt2020:
      return {0.2627, 0.0593};
  }
  throw ConfigError("video_io", "unknown gamut");
}

Eigen::Matrix3d PrimariesToXyz(double xr, double yr, double xg, double yg, double xb, double yb,
                               double xw, double yw) {
  auto column = [](double x, double y) { return Eigen::Vector3d(x / y, 1.0, (1.0 - x - y) / y); };
  Eigen::Matrix3d p;
  p << column(xr, yr), column(xg, yg), column(xb, yb);
  const Eigen::Vector3d white = column(xw, yw);
  const Eigen::Vector3d s = p.colPivHouseholderQr().solve(white);
  return p * s.asDiagonal();
}

}  // namespace

std::string_view ToString(Transfer transfer) {
  switch (transfer) {
    case Transfer::kPq:
      return "pq";
    case Transfer::kHlg:
      return "hlg";
    case Transfer::kBt1886:
      return "bt1886";
  }
  return "?";
}

std::string_view ToString(Gamut gamut) { return gamut == Gamut::kBt709 ? "bt709" : "bt2020"; }

VideoSpec VideoSpec::Parse(std::string_view text) {
  VideoSpec spec;
  bool peak_given = false;
  while (!text.empty()) {
    const size_t comma = text.find(',');
    std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (item.empty()) continue;
    const size_t eq = item.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("video_io", "expected key=value in spec, got '" + std::string(item) + "'");
    const std::string key = Lower(item.substr(0, eq));
    const std::string_view raw = item.substr(eq + 1);
    const std::string value = Lower(raw);
    if (key == "w" || key == "width") {
      spec.width = ParseInt(key, raw);
    } else if (key == "h" || key == "height") {
      spec.height = ParseInt(key, raw);
    } else if (key == "bits" || key == "bit_depth") {
      spec.bit_depth = ParseInt(key, raw);
    } else if (key == "chroma") {
      if (value == "420") spec.chroma = ChromaSubsampling::k420;
      else if (value == "444") spec.chroma = ChromaSubsampling::k444;
      else throw ConfigError("video_io", "unsupported chroma subsampling '" + value + "'");
    } else if (key == "tf" || key == "transfer") {
      if (value == "pq") spec.transfer = Transfer::kPq;
      else if (value == "hlg") spec.transfer = Transfer::kHlg;
      else if (value == "bt1886" || value == "sdr") spec.transfer = Transfer::kBt1886;
      else throw ConfigError("video_io", "unknown transfer '" + value + "'");
    } else if (key == "gamut") {
      if (value == "bt709") spec.gamut = Gamut::kBt709;
      else if (value == "bt2020") spec.gamut = Gamut::kBt2020;
      else throw ConfigError("video_io", "unknown gamut '" + value + "'");
    } else if (key == "peak") {
      spec.peak_luminance = ParseDouble(key, raw);
      peak_given = true;
    } else if (key == "fps") {
      spec.frame_rate = ParseDouble(key, raw);
    } else if (key == "range") {
      if (value == "full") spec.full_range = true;
      else if (value == "limited") spec.full_range = false;
      else throw ConfigError("video_io", "range must be full or limited, got '" + value + "'");
    } else {
      throw ConfigError("video_io", "unknown spec key '" + key + "'");
    }
  }
  if (!peak_given) spec.peak_luminance = spec.transfer == Transfer::kBt1886 ? 100.0 : 1000.0;
  return spec;
}

std::string VideoSpec::ToString() const {
  std::ostringstream os;
  os << "w=" << width << ",h=" << height << ",bits=" << bit_depth
     << ",chroma=" << (chroma == ChromaSubsampling::k444 ? "444" : "420")
     << ",tf=" << cutfunque::ToString(transfer) << ",gamut=" << cutfunque::ToString(gamut)
     << ",peak=" << peak_luminance << ",range=" << (full_range ? "full" : "limited")
     << ",fps=" << frame_rate;
  return os.str();
}

void VideoSpec::Validate() const {
  if (width <= 0 || height <= 0) throw ConfigError("video_io", "width and height must be positive");
  if (bit_depth != 8 && bit_depth != 10 && bit_depth != 12)
    throw ConfigError("video_io", "bit depth must be 8, 10 or 12");
  if (!chroma) throw ConfigError("video_io", "chroma subsampling not specified");
  if (*chroma == ChromaSubsampling::k420 && (width % 2 != 0 || height % 2 != 0))
    throw ConfigError("video_io", "4:2:0 requires even dimensions");
  if (!(peak_luminance > 0)) throw ConfigError("video_io", "peak luminance must be positive");
}

size_t VideoSpec::FrameBytes() const {
  const size_t bytes_per_sample = bit_depth > 8 ? 2 : 1;
  const size_t luma = static_cast<size_t>(width) * height;
  const size_t chroma_size = chroma == ChromaSubsampling::k420 ? luma / 4 : luma;
  return (luma + 2 * chroma_size) * bytes_per_sample;
}

RawFrame UnpackFrame(std::span<const uint8_t> payload, const VideoSpec& spec,
                     long long base_offset) {
  const bool wide = spec.bit_depth > 8;
  const int max_code = spec.MaxCode();
  const bool sub = spec.chroma == ChromaSubsampling::k420;
  const int cw = sub ? spec.width / 2 : spec.width;
  const int ch = sub ? spec.height / 2 : spec.height;
  size_t pos = 0;
  auto next = [&]() -> uint16_t {
    uint16_t v = wide ? static_cast<uint16_t>(payload[pos] | (payload[pos + 1] << 8)) : payload[pos];
    if (v > max_code)
      throw DecodeError("sample " + std::to_string(v) + " exceeds " + std::to_string(spec.bit_depth) +
                            "-bit code range",
                        base_offset + static_cast<long long>(pos));
    pos += wide ? 2 : 1;
    return v;
  };

  RawFrame frame{Plane<uint16_t>(spec.width, spec.height), Plane<uint16_t>(spec.width, spec.height),
                 Plane<uint16_t>(spec.width, spec.height)};
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) frame.y(x, y) = next();
  for (Plane<uint16_t>* plane : {&frame.cb, &frame.cr}) {
    Plane<uint16_t> small(cw, ch);
    for (int y = 0; y < ch; ++y)
      for (int x = 0; x < cw; ++x) small(x, y) = next();
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x)
        (*plane)(x, y) = sub ? small(x / 2, y / 2) : small(x, y);
  }
  return frame;
}

RawFrame ReadRawFrame(std::istream& stream, const VideoSpec& spec, int index) {
  spec.Validate();
  const size_t bytes = spec.FrameBytes();
  const long long offset = static_cast<long long>(bytes) * index;
  stream.clear();
  stream.seekg(offset);
  std::vector<uint8_t> payload(bytes);
  stream.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(bytes));
  if (static_cast<size_t>(stream.gcount()) != bytes)
    throw DecodeError("truncated stream reading frame " + std::to_string(index),
                      offset + stream.gcount());
  return UnpackFrame(payload, spec, offset);
}

VideoReader::VideoReader(std::unique_ptr<std::istream> stream, const VideoSpec& spec)
    : stream_(std::move(stream)), spec_(spec) {
  stream_->seekg(0, std::ios::end);
  stream_size_ = stream_->tellg();
  stream_->seekg(0);
  char magic[9] = {};
  stream_->read(magic, 9);
  is_y4m_ = stream_->gcount() == 9 && std::string_view(magic, 9) == kY4mMagic;
  stream_->clear();
  stream_->seekg(0);
  if (is_y4m_) {
    ParseY4mHeader(spec);
  } else {
    if (spec_.bit_depth == 0) spec_.bit_depth = 8;
    if (!spec_.chroma) spec_.chroma = ChromaSubsampling::k420;
  }
  spec_.Validate();
}

VideoReader VideoReader::Open(const std::filesystem::path& path, const VideoSpec& spec) {
  auto file = std::make_unique<std::ifstream>(path, std::ios::binary);
  if (!*file) throw ConfigError("video_io", "cannot open " + path.string());
  return VideoReader(std::move(file), spec);
}

void VideoReader::ParseY4mHeader(const VideoSpec& requested) {
  std::string header;
  std::getline(*stream_, header);
  if (!*stream_) throw DecodeError("unterminated y4m header", 0);
  data_start_ = static_cast<long long>(header.size()) + 1;

  int width = 0, height = 0, bits = 8;
  ChromaSubsampling chroma = ChromaSubsampling::k420;
  std::istringstream tokens(header.substr(kY4mMagic.size()));
  std::string token;
  while (tokens >> token) {
    const char tag = token[0];
    const std::string value = token.substr(1);
    switch (tag) {
      case 'W':
        width = ParseInt("W", value);
        break;
      case 'H':
        height = ParseInt("H", value);
        break;
      case 'F': {
        const size_t colon = value.find(':');
        if (colon != std::string::npos) {
          const double num = ParseDouble("F", value.substr(0, colon));
          const double den = ParseDouble("F", value.substr(colon + 1));
          if (den > 0) spec_.frame_rate = num / den;
        }
        break;
      }
      case 'C': {
        if (value.rfind("420", 0) == 0) chroma = ChromaSubsampling::k420;
        else if (value.rfind("444", 0) == 0) chroma = ChromaSubsampling::k444;
        else throw ConfigError("video_io", "unsupported y4m colorspace C" + value);
        // C420p10 / C444p12 carry a bit depth; C420jpeg, C420mpeg2 etc. are 8-bit.
        const bool has_depth = value.size() > 4 && value[3] == 'p' && std::isdigit(static_cast<unsigned char>(value[4]));
        bits = has_depth ? ParseInt("C", value.substr(4)) : 8;
        break;
      }
      default:
        break;
    }
  }
  auto check = [](const char* what, int declared, int actual) {
    if (declared != 0 && declared != actual)
      throw ConfigError("video_io", std::string("y4m header ") + what + " " + std::to_string(actual) +
                                        " conflicts with spec value " + std::to_string(declared));
  };
  check("width", requested.width, width);
  check("height", requested.height, height);
  check("bit depth", requested.bit_depth, bits);
  if (requested.chroma && *requested.chroma != chroma)
    throw ConfigError("video_io", "y4m header chroma subsampling conflicts with spec");
  spec_.width = width;
  spec_.height = height;
  spec_.bit_depth = bits;
  spec_.chroma = chroma;
}

long long VideoReader::FrameOffset(int index) {
  if (!is_y4m_) return static_cast<long long>(spec_.FrameBytes()) * index;
  const long long payload = static_cast<long long>(spec_.FrameBytes());
  while (static_cast<int>(y4m_offsets_.size()) <= index) {
    const long long header_at = y4m_offsets_.empty() ? data_start_ : y4m_offsets_.back() + payload;
    if (header_at >= stream_size_)
      throw DecodeError("truncated stream: frame " + std::to_string(index) + " missing", header_at);
    stream_->clear();
    stream_->seekg(header_at);
    std::string line;
    std::getline(*stream_, line);
    if (!*stream_ || line.rfind(kY4mFrame, 0) != 0)
      throw DecodeError("expected FRAME marker", header_at);
    y4m_offsets_.push_back(header_at + static_cast<long long>(line.size()) + 1);
  }
  return y4m_offsets_[index];
}

int VideoReader::FrameCount() {
  const long long payload = static_cast<long long>(spec_.FrameBytes());
  if (!is_y4m_) {
    if (stream_size_ % payload != 0)
      throw DecodeError("truncated stream: trailing partial frame", stream_size_ - stream_size_ % payload);
    return static_cast<int>(stream_size_ / payload);
  }
  int count = 0;
  while (true) {
    if (count == static_cast<int>(y4m_offsets_.size())) {
      const long long next = y4m_offsets_.empty() ? data_start_ : y4m_offsets_.back() + payload;
      if (next >= stream_size_) break;
    }
    const long long at = FrameOffset(count);
    if (at + payload > stream_size_)
      throw DecodeError("truncated stream: frame " + std::to_string(count) + " is incomplete", at);
    ++count;
  }
  return count;
}

RawFrame VideoReader::ReadFrame(int index) {
  if (index < 0) throw ConfigError("video_io", "negative frame index");
  if (!is_y4m_) return ReadRawFrame(*stream_, spec_, index);
  const long long offset = FrameOffset(index);
  const size_t bytes = spec_.FrameBytes();
  stream_->clear();
  stream_->seekg(offset);
  std::vector<uint8_t> payload(bytes);
  stream_->read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(bytes));
  if (static_cast<size_t>(stream_->gcount()) != bytes)
    throw DecodeError("truncated stream reading frame " + std::to_string(index),
                      offset + stream_->gcount());
  return UnpackFrame(payload, spec_, offset);
}

Eigen::Matrix3d RgbToXyz(Gamut gamut) {
  constexpr double kWx = 0.3127, kWy = 0.3290;
  switch (gamut) {
    case Gamut::kBt709:
      return PrimariesToXyz(0.64, 0.33, 0.30, 0.60, 0.15, 0.06, kWx, kWy);
    case Gamut::kBt2020:
      return PrimariesToXyz(0.708, 0.292, 0.170, 0.797, 0.131, 0.046, kWx, kWy);
  }
  throw ConfigError("video_io", "unknown gamut");
}

Eigen::Matrix3d DefaultXyzToLms() {
  Eigen::Matrix3d hpe;
  hpe << 0.4002, 0.7076, -0.0808,  //
      -0.2263, 1.1653, 0.0457,     //
      0.0, 0.0, 0.9182;
  const Eigen::Vector3d white(0.3127 / 0.3290, 1.0, (1.0 - 0.3127 - 0.3290) / 0.3290);
  const Eigen::Vector3d response = hpe * white;
  for (int r = 0; r < 3; ++r) hpe.row(r) *= 0.5 / response(r);
  return hpe;
}

LinearFrame DecodeToLinear(const RawFrame& frame, const VideoSpec& spec,
                           const Eigen::Matrix3d& xyz_to_lms) {
  spec.Validate();
  const LumaCoefficients k = Coefficients(spec.gamut);
  const Eigen::Matrix3d to_lms = xyz_to_lms * RgbToXyz(spec.gamut);
  const double scale = 1 << (spec.bit_depth - 8);
  const double max_code = spec.MaxCode();
  const double hlg_gamma = transfer::HlgSystemGamma(spec.peak_luminance);

  const int w = frame.y.width();
  const int h = frame.y.height();
  LinearFrame out{RealPlane(w, h), RealPlane(w, h), RealPlane(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double luma, cb, cr;
      if (spec.full_range) {
        luma = frame.y(x, y) / max_code;
        cb = (frame.cb(x, y) - (max_code + 1) / 2) / max_code;
        cr = (frame.cr(x, y) - (max_code + 1) / 2) / max_code;
      } else {
        luma = (frame.y(x, y) - 16.0 * scale) / (219.0 * scale);
        cb = (frame.cb(x, y) - 128.0 * scale) / (224.0 * scale);
        cr = (frame.cr(x, y) - 128.0 * scale) / (224.0 * scale);
      }
      const double r_nl = luma + 2.0 * (1.0 - k.kr) * cr;
      const double b_nl = luma + 2.0 * (1.0 - k.kb) * cb;
      const double g_nl = (luma - k.kr * r_nl - k.kb * b_nl) / k.kg();
      Eigen::Vector3d rgb;
      switch (spec.transfer) {
        case Transfer::kPq:
          rgb = {transfer::PqEotf(r_nl), transfer::PqEotf(g_nl), transfer::PqEotf(b_nl)};
          break;
        case Transfer::kBt1886:
          rgb = {transfer::Bt1886Eotf(r_nl, spec.peak_luminance),
                 transfer::Bt1886Eotf(g_nl, spec.peak_luminance),
                 transfer::Bt1886Eotf(b_nl, spec.peak_luminance)};
          break;
        case Transfer::kHlg: {
          const Eigen::Vector3d scene(transfer::HlgInverseOetf(r_nl), transfer::HlgInverseOetf(g_nl),
                                      transfer::HlgInverseOetf(b_nl));
          const double ys = k.kr * scene(0) + k.kg() * scene(1) + k.kb * scene(2);
          const double gain = ys > 0 ? spec.peak_luminance * std::pow(ys, hlg_gamma - 1.0) : 0.0;
          rgb = gain * scene;
          break;
        }
      }
      const Eigen::Vector3d lms = to_lms * rgb;
      out.l(x, y) = std::max(lms(0), 0.0);
      out.m(x, y) = std::max(lms(1), 0.0);
      out.s(x, y) = std::max(lms(2), 0.0);
    }
  }
  return out;
}

LinearFrame RescaleToReference(const LinearFrame& test, int width, int height) {
  if (test.width() == width && test.height() == height) return test;
  return {ResizeBilinear(test.l, width, height), ResizeBilinear(test.m, width, height),
          ResizeBilinear(test.s, width, height)};
}

}  // namespace cutfunque
