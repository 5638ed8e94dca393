#ifndef SALGRAPH_VIDEO_VOLUME_HPP_
#define SALGRAPH_VIDEO_VOLUME_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace salgraph {

// Lattice dimensions shared by every per-voxel structure in the pipeline.
// Voxels are linearized in (frame, row, col) order.
struct Dims {
  std::size_t height = 0;  // rows (m)
  std::size_t width = 0;   // cols (n)
  std::size_t frames = 0;  // t

  std::size_t frame_size() const { return height * width; }
  std::size_t voxels() const { return height * width * frames; }
  std::size_t index(std::size_t f, std::size_t r, std::size_t c) const {
    return (f * height + r) * width + c;
  }
  bool operator==(const Dims&) const = default;
};

std::string to_string(const Dims& d);

enum class ColorSpace { kRgb, kLab };

// The m x n x t x C space-time lattice. Data is float, interleaved by channel.
class VideoVolume {
 public:
  VideoVolume() = default;
  VideoVolume(Dims dims, std::size_t channels, ColorSpace space);

  const Dims& dims() const { return dims_; }
  std::size_t channels() const { return channels_; }
  ColorSpace color_space() const { return space_; }

  float at(std::size_t voxel, std::size_t ch) const { return data_[voxel * channels_ + ch]; }
  float& at(std::size_t voxel, std::size_t ch) { return data_[voxel * channels_ + ch]; }

  std::span<const float> voxel(std::size_t v) const {
    return {data_.data() + v * channels_, channels_};
  }
  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

 private:
  Dims dims_;
  std::size_t channels_ = 0;
  ColorSpace space_ = ColorSpace::kRgb;
  std::vector<float> data_;
};

// Binary per-frame masks on the same lattice; one byte per voxel, 0 or 1.
struct GroundTruthMasks {
  Dims dims;
  std::vector<std::uint8_t> mask;

  std::size_t positives() const;
};

// Loads every file in `dir` whose name matches the glob `pattern`, ordered by
// natural sort (frame2 < frame10). Frames must be 8-bit and share one size.
VideoVolume load_frame_sequence(const std::filesystem::path& dir,
                                const std::string& pattern = "*.png");

// sRGB in [0,1] -> CIELAB (D65). Pixel-local.
VideoVolume rgb_to_lab(const VideoVolume& rgb);

// Per-pixel conversion used by rgb_to_lab; exposed for tests and bindings.
void srgb_to_lab(double r, double g, double b, double lab[3]);

// Loads one mask per frame; gray >= 128 is foreground. `expected` is the video
// lattice the masks must match.
GroundTruthMasks load_ground_truth(const std::filesystem::path& dir, const Dims& expected,
                                   const std::string& pattern = "*.png");

// Filenames in `dir` matching `pattern`, natural-sorted.
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir,
                                               const std::string& pattern);

// True if `a` sorts before `b` when digit runs compare numerically.
bool natural_less(const std::string& a, const std::string& b);

}  // namespace salgraph

#endif  // SALGRAPH_VIDEO_VOLUME_HPP_
