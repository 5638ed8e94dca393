#include "salgraph/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "image_io.hpp"
#include "parallel.hpp"
#include "salgraph/error.hpp"
#include "salgraph/features.hpp"

namespace salgraph {

namespace {

std::string frame_name(std::size_t f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%05zu.png", f + 1);
  return buf;
}

double weighted_pow(double base, double exponent) {
  return exponent == 0.0 ? 1.0 : std::pow(base, exponent);
}

}  // namespace

SaliencyMap render_map(const SaliencyScores& g, const LabelVolume& labels) {
  if (static_cast<std::size_t>(g.g.size()) != labels.unit_count())
    throw DataError("score count " + std::to_string(g.g.size()) + " does not match " +
                    std::to_string(labels.unit_count()) + " units");
  SaliencyMap map{labels.dims(), std::vector<float>(labels.dims().voxels())};
  for (std::size_t v = 0; v < map.values.size(); ++v)
    map.values[v] = static_cast<float>(std::clamp(g.g[labels[v]], 0.0, 1.0));
  return map;
}

SaliencyMap normalize_map(const SaliencyMap& map) {
  SaliencyMap out{map.dims, std::vector<float>(map.values.size())};
  if (map.values.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(map.values.begin(), map.values.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) {
    std::fill(out.values.begin(), out.values.end(), 0.5f);
    return out;
  }
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = static_cast<float>((map.values[i] - lo) / (hi - lo));
  return out;
}

SaliencyMap fuse_maps_raw(const SaliencyMap& lab, const SaliencyMap& deep, const FusionConfig& cfg) {
  if (!(cfg.beta >= 0.0 && cfg.beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
  if (lab.dims != deep.dims || lab.values.size() != deep.values.size())
    throw DataError("cannot fuse maps of different dimensions: " + to_string(lab.dims) + " vs " +
                    to_string(deep.dims));
  SaliencyMap out{lab.dims, std::vector<float>(lab.values.size())};
  detail::parallel_for(out.values.size(), [&](std::size_t i) {
    out.values[i] = static_cast<float>(weighted_pow(lab.values[i], 1.0 - cfg.beta) *
                                       weighted_pow(deep.values[i], cfg.beta));
  });
  return out;
}

SaliencyMap fuse_maps(const SaliencyMap& lab, const SaliencyMap& deep, const FusionConfig& cfg) {
  return normalize_map(fuse_maps_raw(lab, deep, cfg));
}

std::vector<std::uint8_t> threshold_region(const SaliencyMap& map, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("threshold must lie in [0, 1]");
  std::vector<std::uint8_t> region(map.values.size());
  for (std::size_t i = 0; i < region.size(); ++i) region[i] = map.values[i] >= tau ? 1 : 0;
  return region;
}

std::uint8_t quantize(float s) {
  const double v = std::floor(255.0 * std::clamp(static_cast<double>(s), 0.0, 1.0) + 0.5);
  return static_cast<std::uint8_t>(v);
}

std::vector<std::filesystem::path> write_map(const SaliencyMap& map,
                                             const std::filesystem::path& dir,
                                             const std::string& suffix) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw RuntimeFailure("cannot create " + dir.string() + ": " + ec.message());
  const Dims& d = map.dims;
  std::vector<std::filesystem::path> written;
  for (std::size_t f = 0; f < d.frames; ++f) {
    detail::Image8 img{static_cast<int>(d.height), static_cast<int>(d.width), 1,
                       std::vector<std::uint8_t>(d.frame_size())};
    for (std::size_t k = 0; k < d.frame_size(); ++k)
      img.px[k] = quantize(map.values[f * d.frame_size() + k]);
    const auto path = dir / frame_name(f);
    detail::write_png8(path.string() + suffix, img);
    written.push_back(path);
  }
  const auto fvol = dir / "map.fvol";
  write_fvol(fvol.string() + suffix, FeatureTensor(d, 1, map.values));
  written.push_back(fvol);
  return written;
}

SaliencyMap read_map(const std::filesystem::path& fvol_path) {
  FeatureTensor t = read_fvol(fvol_path);
  if (t.channels() != 1)
    throw DataError("saliency map FVOL must have C=1, got " + std::to_string(t.channels()));
  for (float v : t.values())
    if (v < 0.0f || v > 1.0f) throw DataError("saliency map values must lie in [0, 1]");
  return SaliencyMap{t.dims(), t.values()};
}

std::vector<std::filesystem::path> write_overlay(const SaliencyMap& map, const VideoVolume& rgb,
                                                 const std::filesystem::path& dir,
                                                 const std::string& suffix) {
  if (rgb.dims() != map.dims || rgb.channels() != 3)
    throw DataError("overlay needs an RGB video matching the map dims");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw RuntimeFailure("cannot create " + dir.string() + ": " + ec.message());
  const Dims& d = map.dims;
  std::vector<std::filesystem::path> written;
  for (std::size_t f = 0; f < d.frames; ++f) {
    detail::Image8 img{static_cast<int>(d.height), static_cast<int>(d.width), 3,
                       std::vector<std::uint8_t>(d.frame_size() * 3)};
    for (std::size_t k = 0; k < d.frame_size(); ++k) {
      const std::size_t v = f * d.frame_size() + k;
      for (std::size_t c = 0; c < 3; ++c)
        img.px[3 * k + c] = quantize(0.5f * rgb.at(v, c) + 0.5f * map.values[v]);
    }
    const auto path = dir / frame_name(f);
    detail::write_png8(path.string() + suffix, img);
    written.push_back(path);
  }
  return written;
}

}  // namespace salgraph
