#ifndef SALGRAPH_FUSION_HPP_
#define SALGRAPH_FUSION_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "salgraph/propagation.hpp"
#include "salgraph/supervoxel.hpp"
#include "salgraph/video_volume.hpp"

namespace salgraph {

// Per-voxel saliency in [0,1] over the video lattice.
struct SaliencyMap {
  Dims dims;
  std::vector<float> values;

  bool operator==(const SaliencyMap&) const = default;
};

struct FusionConfig {
  double beta = 0.7;  // weight of the deep-feature map
};

// Every voxel takes its unit's (normalized) score.
SaliencyMap render_map(const SaliencyScores& g, const LabelVolume& labels);

// Min-max to [0,1]; a constant map becomes all 0.5.
SaliencyMap normalize_map(const SaliencyMap& map);

// Element-wise pow(lab, 1 - beta) * pow(deep, beta) without renormalization.
// A factor whose exponent is 0 is dropped, so 0^0 contributes 1.
SaliencyMap fuse_maps_raw(const SaliencyMap& lab, const SaliencyMap& deep, const FusionConfig& cfg);

// fuse_maps_raw followed by normalize_map.
SaliencyMap fuse_maps(const SaliencyMap& lab, const SaliencyMap& deep, const FusionConfig& cfg);

// value >= tau -> 1.
std::vector<std::uint8_t> threshold_region(const SaliencyMap& map, double tau);

// round-half-up(255 * s).
std::uint8_t quantize(float s);

// dir/frame_%05d.png (8-bit gray, 1-based frame numbers) and dir/map.fvol (C=1).
// Files are written under `suffix` appended to each name (e.g. ".partial");
// the returned paths are the final names without it.
std::vector<std::filesystem::path> write_map(const SaliencyMap& map,
                                             const std::filesystem::path& dir,
                                             const std::string& suffix = "");

// Reads a C=1 FVOL back into a map.
SaliencyMap read_map(const std::filesystem::path& fvol_path);

// Input frames blended with the map drawn as gray at 0.5 opacity.
std::vector<std::filesystem::path> write_overlay(const SaliencyMap& map, const VideoVolume& rgb,
                                                 const std::filesystem::path& dir,
                                                 const std::string& suffix = "");

}  // namespace salgraph

#endif  // SALGRAPH_FUSION_HPP_
