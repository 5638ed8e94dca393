#ifndef SALGRAPH_IMAGE_IO_HPP_
#define SALGRAPH_IMAGE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

namespace salgraph::detail {

struct Image8 {
  int rows = 0;
  int cols = 0;
  int channels = 0;               // 1 or 3
  std::vector<std::uint8_t> px;   // row-major, interleaved, RGB order
};

// Decodes an 8-bit image. want_channels 3 yields RGB, 1 yields luminance-free
// gray (color inputs are converted with the standard BT.601 weights).
Image8 read_image8(const std::filesystem::path& path, int want_channels);

void write_png8(const std::filesystem::path& path, const Image8& img);

}  // namespace salgraph::detail

#endif  // SALGRAPH_IMAGE_IO_HPP_
