#ifndef SALGRAPH_FEATURES_HPP_
#define SALGRAPH_FEATURES_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "salgraph/supervoxel.hpp"
#include "salgraph/video_volume.hpp"

namespace salgraph {

// Per-voxel feature maps, m x n x t x C, float, (frame, row, col, channel).
class FeatureTensor {
 public:
  FeatureTensor() = default;
  FeatureTensor(Dims dims, std::size_t channels);
  FeatureTensor(Dims dims, std::size_t channels, std::vector<float> values);

  const Dims& dims() const { return dims_; }
  std::size_t channels() const { return channels_; }
  std::span<const float> voxel(std::size_t v) const {
    return {values_.data() + v * channels_, channels_};
  }
  const std::vector<float>& values() const { return values_; }
  std::vector<float>& values() { return values_; }

  bool operator==(const FeatureTensor&) const = default;

 private:
  Dims dims_;
  std::size_t channels_ = 0;
  std::vector<float> values_;
};

// Pooled descriptors, one row of `channels` values per unit.
struct UnitFeatureTable {
  std::size_t units = 0;
  std::size_t channels = 0;
  std::vector<double> values;  // row-major units x channels

  std::span<const double> row(std::size_t u) const {
    return {values.data() + u * channels, channels};
  }
};

// Wraps a LAB volume as a C=3 tensor. Rejects non-finite values.
FeatureTensor lab_feature_tensor(const VideoVolume& lab);

// FVOL: "FVOL", u32 version=1, u32 m, n, t, C, u8 dtype (1 = f32 LE), payload
// in (frame, row, col, channel) order.
inline constexpr std::uint8_t kFvolFloat32 = 1;

void write_fvol(const std::filesystem::path& path, const FeatureTensor& tensor);

// Reads any FVOL; dims come from the header.
FeatureTensor read_fvol(const std::filesystem::path& path);

// Reads an FVOL and checks its lattice against the video's.
FeatureTensor read_feature_tensor(const std::filesystem::path& path, const Dims& expected);

// Intra-frame max over a unit's voxels, then mean of those maxima over the
// frames the unit touches.
UnitFeatureTable pool_unit_features(const FeatureTensor& tensor, const LabelVolume& labels);

}  // namespace salgraph

#endif  // SALGRAPH_FEATURES_HPP_
