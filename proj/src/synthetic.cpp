#include "salgraph/synthetic.hpp"

#include <algorithm>
#include <cstdio>

#include "image_io.hpp"
#include "salgraph/error.hpp"

namespace salgraph {

namespace {

// Integer hash for a static per-pixel texture; no RNG state involved.
std::uint32_t mix(std::uint32_t x) {
  x ^= x >> 16;
  x *= 0x7feb352dU;
  x ^= x >> 15;
  x *= 0x846ca68bU;
  x ^= x >> 16;
  return x;
}

}  // namespace

SyntheticClip moving_square_clip(const Dims& dims, std::size_t side) {
  if (side == 0 || side > dims.height || side > dims.width)
    throw ConfigError("square side must fit inside the frame");
  SyntheticClip clip{VideoVolume(dims, 3, ColorSpace::kRgb), GroundTruthMasks{dims, {}}};
  clip.gt.mask.assign(dims.voxels(), 0);

  const std::size_t travel_x = dims.width - side, travel_y = dims.height - side;
  for (std::size_t f = 0; f < dims.frames; ++f) {
    // Diagonal sweep from top-left to bottom-right over the clip.
    const std::size_t x0 = dims.frames > 1 ? f * travel_x / (dims.frames - 1) : 0;
    const std::size_t y0 = dims.frames > 1 ? f * travel_y / (dims.frames - 1) : 0;
    for (std::size_t r = 0; r < dims.height; ++r)
      for (std::size_t c = 0; c < dims.width; ++c) {
        const std::size_t v = dims.index(f, r, c);
        int rgb[3];
        const bool inside = r >= y0 && r < y0 + side && c >= x0 && c < x0 + side;
        if (inside) {
          rgb[0] = 230, rgb[1] = 40, rgb[2] = 50;
          clip.gt.mask[v] = 1;
        } else {
          const bool cell = ((r / 4) + (c / 4)) % 2 == 0;
          const auto noise = static_cast<int>(mix(static_cast<std::uint32_t>(r * 977 + c)) % 9) - 4;
          rgb[0] = (cell ? 70 : 90) + noise;
          rgb[1] = (cell ? 120 : 140) + noise;
          rgb[2] = (cell ? 80 : 70) + noise;
        }
        for (int ch = 0; ch < 3; ++ch)
          clip.rgb.at(v, static_cast<std::size_t>(ch)) = static_cast<float>(rgb[ch]) / 255.0f;
      }
  }
  return clip;
}

void write_clip(const SyntheticClip& clip, const std::filesystem::path& frames_dir,
                const std::filesystem::path& gt_dir) {
  std::filesystem::create_directories(frames_dir);
  std::filesystem::create_directories(gt_dir);
  const Dims& d = clip.rgb.dims();
  for (std::size_t f = 0; f < d.frames; ++f) {
    detail::Image8 frame{static_cast<int>(d.height), static_cast<int>(d.width), 3,
                         std::vector<std::uint8_t>(d.frame_size() * 3)};
    detail::Image8 mask{static_cast<int>(d.height), static_cast<int>(d.width), 1,
                        std::vector<std::uint8_t>(d.frame_size())};
    for (std::size_t k = 0; k < d.frame_size(); ++k) {
      const std::size_t v = f * d.frame_size() + k;
      for (std::size_t c = 0; c < 3; ++c)
        frame.px[3 * k + c] =
            static_cast<std::uint8_t>(std::clamp(clip.rgb.at(v, c) * 255.0f + 0.5f, 0.0f, 255.0f));
      mask.px[k] = clip.gt.mask[v] ? 255 : 0;
    }
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu.png", f + 1);
    detail::write_png8(frames_dir / name, frame);
    std::snprintf(name, sizeof name, "mask_%03zu.png", f + 1);
    detail::write_png8(gt_dir / name, mask);
  }
}

}  // namespace salgraph
