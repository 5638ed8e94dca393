#ifndef SALGRAPH_SUPERVOXEL_HPP_
#define SALGRAPH_SUPERVOXEL_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "salgraph/video_volume.hpp"

namespace salgraph {

// Voxel (or region) neighborhood on the lattice: 6 = 4 spatial + 2 temporal,
// 26 = full 3x3x3 cube.
enum class Connectivity { k6 = 6, k26 = 26 };

Connectivity connectivity_from_int(int c);

// Calls fn(a, b) once per unordered pair of neighboring voxels with a < b, in
// ascending order of a.
template <typename Fn>
void for_each_neighbor_pair(const Dims& d, Connectivity conn, Fn&& fn);

// Dense unit labels in [0, unit_count) over a lattice.
class LabelVolume {
 public:
  LabelVolume() = default;
  // Labels must already be dense; validated.
  LabelVolume(Dims dims, std::vector<std::uint32_t> labels);

  const Dims& dims() const { return dims_; }
  std::size_t unit_count() const { return unit_count_; }
  std::uint32_t operator[](std::size_t voxel) const { return labels_[voxel]; }
  const std::vector<std::uint32_t>& labels() const { return labels_; }

  bool operator==(const LabelVolume&) const = default;

 private:
  Dims dims_;
  std::size_t unit_count_ = 0;
  std::vector<std::uint32_t> labels_;
};

// Renumbers arbitrary ids to dense ids in order of first occurrence.
LabelVolume make_dense(Dims dims, const std::vector<std::uint32_t>& raw);

// LVOL: "LVOL", u32 version=1, u32 m, n, t, u32 unit_count, then m*n*t u32
// labels in (frame, row, col) order; everything little-endian.
void write_lvol(const std::filesystem::path& path, const LabelVolume& labels);
LabelVolume read_lvol(const std::filesystem::path& path);

struct WeightedEdge {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  double weight = 0.0;
};

// Lattice edges weighted by Euclidean distance in the volume's channels.
// Returned sorted by (weight, a, b).
std::vector<WeightedEdge> build_voxel_graph(const VideoVolume& lab, Connectivity conn);

struct FhParams {
  double k = 8.0;              // threshold scale, tau(C) = k / |C|
  std::size_t min_size = 100;  // voxels
};

// Felzenszwalb-Huttenlocher merging over an edge list already sorted by
// (weight, a, b). `sizes` gives the initial size of each node (voxel counts;
// all ones for a voxel graph). Returns dense component ids per node.
std::vector<std::uint32_t> fh_merge(const std::vector<WeightedEdge>& sorted_edges,
                                    const std::vector<std::size_t>& sizes, double k,
                                    std::size_t min_size);

// Base over-segmentation of a voxel graph.
LabelVolume fh_segment(const std::vector<WeightedEdge>& sorted_edges, const Dims& dims,
                       const FhParams& params);

// Layer 0 is the finest; layer_count() - 1 the coarsest.
class SupervoxelHierarchy {
 public:
  explicit SupervoxelHierarchy(std::vector<LabelVolume> layers);

  std::size_t layer_count() const { return layers_.size(); }
  const std::vector<LabelVolume>& layers() const { return layers_; }

  // 1-based, matching the CLI's --layer flag: 1 = finest, layer_count() = coarsest.
  const LabelVolume& select_layer(std::size_t index) const;

 private:
  std::vector<LabelVolume> layers_;
};

// Histogram bins per LAB channel used for region distances.
inline constexpr std::size_t kHistogramBins = 20;

// Repeatedly merges the region adjacency graph of the previous layer with FH,
// using chi-squared distance between per-region LAB histograms and doubling k
// each level. levels counts the base layer.
SupervoxelHierarchy build_hierarchy(const VideoVolume& lab, const LabelVolume& base,
                                    std::size_t levels, double base_k,
                                    Connectivity conn = Connectivity::k6);

// Chi-squared distance 0.5 * sum (x - y)^2 / (x + y) over bins with x + y > 0.
double chi_squared(const std::vector<double>& x, const std::vector<double>& y);

// Per-region histograms: kHistogramBins per channel, each channel normalized to
// sum 1. L spans [0,100], a and b span [-128,128).
std::vector<std::vector<double>> region_histograms(const VideoVolume& lab,
                                                   const LabelVolume& labels);

// Unordered region pairs that touch under `conn`, sorted, unique.
std::vector<std::pair<std::uint32_t, std::uint32_t>> region_adjacency(const LabelVolume& labels,
                                                                      Connectivity conn);

// Convenience wrapper: voxel graph, base FH, hierarchy.
SupervoxelHierarchy segment_video(const VideoVolume& lab, const FhParams& params,
                                  std::size_t levels, Connectivity conn = Connectivity::k6);

// ---------------------------------------------------------------------------

template <typename Fn>
void for_each_neighbor_pair(const Dims& d, Connectivity conn, Fn&& fn) {
  // Forward half of the neighborhood, so each unordered pair is visited once.
  struct Off {
    int df, dr, dc;
  };
  std::vector<Off> offsets;
  if (conn == Connectivity::k6) {
    offsets = {{0, 0, 1}, {0, 1, 0}, {1, 0, 0}};
  } else {
    for (int df = -1; df <= 1; ++df)
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          const int lin = (df * 3 + dr) * 3 + dc;
          if (lin > 0) offsets.push_back({df, dr, dc});
        }
  }
  const auto H = static_cast<long>(d.height), W = static_cast<long>(d.width),
             T = static_cast<long>(d.frames);
  for (long f = 0; f < T; ++f)
    for (long r = 0; r < H; ++r)
      for (long c = 0; c < W; ++c) {
        const auto a = static_cast<std::size_t>((f * H + r) * W + c);
        for (const auto& o : offsets) {
          const long f2 = f + o.df, r2 = r + o.dr, c2 = c + o.dc;
          if (f2 < 0 || f2 >= T || r2 < 0 || r2 >= H || c2 < 0 || c2 >= W) continue;
          fn(a, static_cast<std::size_t>((f2 * H + r2) * W + c2));
        }
      }
}

}  // namespace salgraph

#endif  // SALGRAPH_SUPERVOXEL_HPP_
