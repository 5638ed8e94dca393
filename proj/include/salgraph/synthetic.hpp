#ifndef SALGRAPH_SYNTHETIC_HPP_
#define SALGRAPH_SYNTHETIC_HPP_

#include <cstddef>
#include <filesystem>

#include "salgraph/video_volume.hpp"

namespace salgraph {

// A colored square sliding over a static textured background, with the square
// as ground truth. Pixel values are multiples of 1/255 so the clip survives a
// PNG round trip unchanged.
struct SyntheticClip {
  VideoVolume rgb;
  GroundTruthMasks gt;
};

SyntheticClip moving_square_clip(const Dims& dims = {32, 32, 16}, std::size_t side = 8);

// frames_dir/frame_%03d.png and gt_dir/mask_%03d.png (1-based).
void write_clip(const SyntheticClip& clip, const std::filesystem::path& frames_dir,
                const std::filesystem::path& gt_dir);

}  // namespace salgraph

#endif  // SALGRAPH_SYNTHETIC_HPP_
