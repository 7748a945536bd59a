#include "cutfunque/manifest.h"

#include <cstdio>
#include <fstream>
#include <map>

#include "cutfunque/error.h"

namespace cutfunque {
namespace {

using features::MapId;

constexpr std::array<MapId, 4> kBinnedMaps = {MapId::kLSsimSigma, MapId::kLVif, MapId::kLSRred, MapId::kDlm};
constexpr std::array<const char*, 4> kAggregations = {"mean", "worst-L", "worst-S", "worst-T"};
constexpr std::array<char, 3> kMeasureLetters = {'L', 'S', 'T'};

std::string Polarity(bool distortion) { return distortion ? "distortion" : "quality"; }

// Which quantity a manifest entry refers to, decoded from its source and
// aggregation strings.
struct Request {
  int variant = -1;
  enum Kind { kWavelet, kStSim, kNss, kGlobalFosd } kind = kWavelet;
  MapId map = MapId::kLSsimMu;
  bool sosd = false;
  int nss_index = 0;
  enum Agg { kMean, kWorst, kBin, kGlobal } agg = kMean;
  binning::Measure measure = binning::Measure::kL;
  int bin = 0;
};

Request Decode(const FeatureDescriptor& d) {
  auto fail = [&](const std::string& why) -> AssemblyError {
    return AssemblyError("cannot supply feature '" + d.name + "': " + why);
  };
  Request r;
  const auto slash = d.source.find('/');
  if (slash == std::string::npos) throw fail("source '" + d.source + "' lacks a variant");
  const std::string variant = d.source.substr(0, slash), what = d.source.substr(slash + 1);
  for (int v = 0; v < kVariants; ++v)
    if (variant == kVariantNames[v]) r.variant = v;
  if (r.variant < 0) throw fail("unknown variant '" + variant + "'");

  bool found = false;
  for (int m = 0; m < features::kNumMaps && !found; ++m) {
    if (what == features::MapName(static_cast<MapId>(m))) {
      r.kind = Request::kWavelet;
      r.map = static_cast<MapId>(m);
      found = true;
    }
  }
  if (!found && (what == "FOSD" || what == "SOSD")) {
    r.kind = Request::kStSim;
    r.sosd = what == "SOSD";
    found = true;
  }
  if (!found && what == "global-FOSD") {
    r.kind = Request::kGlobalFosd;
    found = true;
  }
  for (int k = 0; k < nss::kGlobalFeatures && !found; ++k) {
    if (what == std::string("NSS:") + kNssNames[k]) {
      r.kind = Request::kNss;
      r.nss_index = k;
      found = true;
    }
  }
  if (!found) throw fail("unknown source '" + what + "'");

  const std::string& a = d.aggregation;
  if (a == "mean") {
    r.agg = Request::kMean;
  } else if (a == "global") {
    r.agg = Request::kGlobal;
  } else if (a.size() == 7 && a.starts_with("worst-")) {
    r.agg = Request::kWorst;
    const auto pos = std::string_view("LST").find(a[6]);
    if (pos == std::string_view::npos) throw fail("unknown aggregation '" + a + "'");
    r.measure = static_cast<binning::Measure>(pos);
  } else if (a.size() == 6 && a.starts_with("bin-")) {
    r.agg = Request::kBin;
    const auto pos = std::string_view("LST").find(a[4]);
    r.bin = a[5] - '0';
    if (pos == std::string_view::npos || r.bin < 0 || r.bin >= binning::kBins)
      throw fail("unknown aggregation '" + a + "'");
    r.measure = static_cast<binning::Measure>(pos);
  } else {
    throw fail("unknown aggregation '" + a + "'");
  }
  const bool global_source = r.kind == Request::kNss || r.kind == Request::kGlobalFosd;
  if (global_source != (r.agg == Request::kGlobal)) throw fail("aggregation '" + a + "' does not fit its source");
  return r;
}

// Bin values of one map at one scale for one measure type, lazily cached.
struct ScaleAggregates {
  double mean = 0;
  std::array<std::array<std::optional<double>, binning::kBins>, 3> bins;
};

ScaleAggregates AggregateScale(const RealPlane& map, const binning::CutMeasures& measures,
                               const binning::BinConfig& cfg, bool minkowski) {
  ScaleAggregates out;
  out.mean = binning::UnweightedMean(map);
  for (binning::Measure m : binning::kMeasures) {
    const RealPlane& values = measures.get(m);
    if (values.width() != map.width() || values.height() != map.height())
      throw AssemblyError("cut grid mismatch between map and measures");
    for (int b = 0; b < binning::kBins; ++b)
      out.bins[static_cast<int>(m)][b] =
          binning::Aggregate(map, binning::MembershipPlane(values, cfg, m, b), minkowski);
  }
  return out;
}

}  // namespace

std::string Fnv1a64Hex(std::string_view text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

FeatureManifest FeatureManifest::Canonical() {
  std::vector<FeatureDescriptor> e;
  for (const char* variant : kVariantNames) {
    const std::string v = variant;
    for (int m = 0; m < features::kNumMaps; ++m) {
      const auto id = static_cast<MapId>(m);
      const std::string map(features::MapName(id));
      for (const char* agg : kAggregations)
        e.push_back({v + "_" + map + "_" + agg, v + "/" + map, agg, Polarity(features::IsDistortion(id))});
    }
    for (const char* src : {"FOSD", "SOSD"})
      for (const char* agg : kAggregations)
        e.push_back({v + "_" + src + "_" + agg, v + "/" + src, agg, "distortion"});
    for (const char* nss : kNssNames)
      e.push_back({v + "_NSS_" + nss, v + "/NSS:" + nss, "global", "neutral"});
    e.push_back({v + "_global-FOSD", v + "/global-FOSD", "global", "distortion"});
    for (MapId id : kBinnedMaps) {
      const std::string map(features::MapName(id));
      for (char letter : kMeasureLetters)
        for (int b = 0; b < binning::kBins; ++b) {
          const std::string agg = std::string("bin-") + letter + std::to_string(b);
          e.push_back({v + "_" + map + "_" + agg, v + "/" + map, agg, Polarity(features::IsDistortion(id))});
        }
    }
  }
  return FeatureManifest(std::move(e));
}

FeatureManifest FeatureManifest::FromJson(const nlohmann::json& j) {
  std::vector<FeatureDescriptor> entries;
  for (const auto& f : j.at("features"))
    entries.push_back({f.at("name").get<std::string>(), f.at("source").get<std::string>(),
                       f.at("aggregation").get<std::string>(), f.at("polarity").get<std::string>()});
  FeatureManifest m(std::move(entries));
  if (j.contains("hash") && j["hash"].get<std::string>() != m.Hash())
    throw ConfigError("binning", "manifest hash does not match its entries");
  return m;
}

FeatureManifest FeatureManifest::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("binning", "cannot open manifest " + path.string());
  try {
    return FromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("binning", "malformed manifest " + path.string() + ": " + e.what());
  }
}

nlohmann::json FeatureManifest::ToJson() const {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& d : entries_)
    features.push_back(
        {{"name", d.name}, {"source", d.source}, {"aggregation", d.aggregation}, {"polarity", d.polarity}});
  return {{"count", entries_.size()}, {"hash", Hash()}, {"features", features}};
}

std::string FeatureManifest::Hash() const {
  std::string text;
  for (const auto& d : entries_) text += d.name + "\t" + d.source + "\t" + d.aggregation + "\t" + d.polarity + "\n";
  return Fnv1a64Hex(text);
}

FeatureVector AssembleFrame(const FrameData& frame, const FeatureManifest& manifest,
                            const binning::BinConfig& cfg) {
  // Cache per (variant, source, scale); sources are keyed by their string.
  std::map<std::pair<std::string, int>, std::optional<ScaleAggregates>> cache;
  auto scale_aggregates = [&](const FeatureDescriptor& d, const Request& r,
                              int lambda) -> const std::optional<ScaleAggregates>& {
    auto [it, inserted] = cache.try_emplace({d.source, lambda});
    if (!inserted) return it->second;
    const VariantFrame& vf = frame.variants[r.variant];
    const RealPlane* map = nullptr;
    bool minkowski = false;
    if (r.kind == Request::kWavelet) {
      const auto& slot = vf.maps[lambda - 1][static_cast<int>(r.map)];
      if (!slot) {
        if (!features::IsTemporal(r.map))
          throw AssemblyError("missing map for feature '" + d.name + "' at scale " + std::to_string(lambda));
        return it->second;
      }
      map = &*slot;
      minkowski = features::IsSsimFamily(r.map);
    } else {
      const auto& slot = vf.stsim[lambda - 1];
      if (!slot) throw AssemblyError("missing StSim maps for feature '" + d.name + "'");
      map = r.sosd ? &slot->sosd : &slot->fosd;
    }
    it->second = AggregateScale(*map, frame.measures[lambda - 1], cfg, minkowski);
    return it->second;
  };

  FeatureVector out;
  out.reserve(manifest.size());
  for (const auto& d : manifest.entries()) {
    const Request r = Decode(d);
    const VariantFrame& vf = frame.variants[r.variant];
    if (r.kind == Request::kNss) {
      if (!vf.global_nss) throw AssemblyError("missing global NSS for feature '" + d.name + "'");
      out.push_back((*vf.global_nss)[r.nss_index]);
      continue;
    }
    if (r.kind == Request::kGlobalFosd) {
      if (!vf.global_fosd) throw AssemblyError("missing global FOSD for feature '" + d.name + "'");
      out.push_back(vf.global_fosd);
      continue;
    }
    const bool distortion = d.polarity == "distortion";
    std::array<std::optional<double>, binning::kScales> per_scale;
    for (int lambda = 1; lambda <= binning::kScales; ++lambda) {
      const auto& agg = scale_aggregates(d, r, lambda);
      if (!agg) continue;
      const auto& bins = agg->bins[static_cast<int>(r.measure)];
      switch (r.agg) {
        case Request::kMean:
          per_scale[lambda - 1] = agg->mean;
          break;
        case Request::kWorst:
          per_scale[lambda - 1] = binning::WorstBin(bins, distortion).value_or(agg->mean);
          break;
        case Request::kBin:
          per_scale[lambda - 1] = bins[r.bin].value_or(agg->mean);
          break;
        case Request::kGlobal:
          break;
      }
    }
    out.push_back(binning::FuseScales(per_scale));
  }
  return out;
}

FeatureVector PoolFrames(const std::vector<FeatureVector>& frames) {
  if (frames.empty()) return {};
  const size_t n = frames.front().size();
  FeatureVector out(n);
  for (size_t i = 0; i < n; ++i) {
    double sum = 0;
    int count = 0;
    for (const auto& f : frames) {
      if (f.size() != n) throw AssemblyError("frame vectors differ in length");
      if (f[i]) {
        sum += *f[i];
        ++count;
      }
    }
    if (count) out[i] = sum / count;
  }
  return out;
}

}  // namespace cutfunque
