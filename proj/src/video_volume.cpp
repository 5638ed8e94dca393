#include "salgraph/video_volume.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <cctype>
#include <cmath>

#include "image_io.hpp"
#include "parallel.hpp"
#include "salgraph/error.hpp"

namespace salgraph {

std::string to_string(const Dims& d) {
  return std::to_string(d.height) + "x" + std::to_string(d.width) + "x" +
         std::to_string(d.frames);
}

VideoVolume::VideoVolume(Dims dims, std::size_t channels, ColorSpace space)
    : dims_(dims), channels_(channels), space_(space) {
  if (dims.height == 0 || dims.width == 0 || dims.frames == 0 || channels == 0)
    throw DataError("video volume dimensions must be positive, got " + to_string(dims) +
                    "x" + std::to_string(channels));
  data_.assign(dims.voxels() * channels, 0.0f);
}

std::size_t GroundTruthMasks::positives() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const bool da = std::isdigit(static_cast<unsigned char>(a[i])) != 0;
    const bool db = std::isdigit(static_cast<unsigned char>(b[j])) != 0;
    if (da && db) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      // Compare digit runs numerically without overflow: strip leading zeros,
      // then longer wins, then lexicographic.
      std::size_t is = i, js = j;
      while (is + 1 < ie && a[is] == '0') ++is;
      while (js + 1 < je && b[js] == '0') ++js;
      const std::size_t la = ie - is, lb = je - js;
      if (la != lb) return la < lb;
      const int cmp = a.compare(is, la, b, js, lb);
      if (cmp != 0) return cmp < 0;
      if ((ie - i) != (je - j)) return (ie - i) < (je - j);
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  return (a.size() - i) < (b.size() - j);
}

std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir,
                                               const std::string& pattern) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw DataError("missing directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (fnmatch(pattern.c_str(), name.c_str(), 0) == 0) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(), [](const fs::path& x, const fs::path& y) {
    return natural_less(x.filename().string(), y.filename().string());
  });
  return files;
}

VideoVolume load_frame_sequence(const std::filesystem::path& dir, const std::string& pattern) {
  const auto files = list_frames(dir, pattern);
  if (files.empty()) throw DataError("no frames matched '" + pattern + "' in " + dir.string());

  std::vector<detail::Image8> images(files.size());
  detail::parallel_for(files.size(),
                       [&](std::size_t i) { images[i] = detail::read_image8(files[i], 3); });

  const Dims dims{static_cast<std::size_t>(images[0].rows),
                  static_cast<std::size_t>(images[0].cols), images.size()};
  for (std::size_t f = 0; f < images.size(); ++f) {
    if (static_cast<std::size_t>(images[f].rows) != dims.height ||
        static_cast<std::size_t>(images[f].cols) != dims.width)
      throw DataError("inconsistent frame size: " + files[f].filename().string());
  }

  VideoVolume vol(dims, 3, ColorSpace::kRgb);
  auto out = vol.data();
  const std::size_t per_frame = dims.frame_size() * 3;
  for (std::size_t f = 0; f < images.size(); ++f) {
    for (std::size_t k = 0; k < per_frame; ++k)
      out[f * per_frame + k] = static_cast<float>(images[f].px[k]) / 255.0f;
  }
  return vol;
}

namespace {

double srgb_linearize(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double kDelta = 6.0 / 29.0;
  return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

}  // namespace

void srgb_to_lab(double r, double g, double b, double lab[3]) {
  // D65 reference white.
  constexpr double kXn = 0.95047, kYn = 1.0, kZn = 1.08883;
  r = srgb_linearize(r);
  g = srgb_linearize(g);
  b = srgb_linearize(b);
  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  const double fx = lab_f(x / kXn), fy = lab_f(y / kYn), fz = lab_f(z / kZn);
  lab[0] = 116.0 * fy - 16.0;
  lab[1] = 500.0 * (fx - fy);
  lab[2] = 200.0 * (fy - fz);
}

VideoVolume rgb_to_lab(const VideoVolume& rgb) {
  if (rgb.channels() != 3)
    throw DataError("rgb_to_lab expects 3 channels, got " + std::to_string(rgb.channels()));
  VideoVolume lab(rgb.dims(), 3, ColorSpace::kLab);
  const auto in = rgb.data();
  auto out = lab.data();
  detail::parallel_for(rgb.dims().voxels(), [&](std::size_t v) {
    double px[3];
    srgb_to_lab(in[3 * v], in[3 * v + 1], in[3 * v + 2], px);
    for (int c = 0; c < 3; ++c) out[3 * v + c] = static_cast<float>(px[c]);
  });
  return lab;
}

GroundTruthMasks load_ground_truth(const std::filesystem::path& dir, const Dims& expected,
                                   const std::string& pattern) {
  const auto files = list_frames(dir, pattern);
  if (files.size() != expected.frames)
    throw DataError("ground truth has " + std::to_string(files.size()) +
                    " masks for a " + std::to_string(expected.frames) + "-frame video");
  GroundTruthMasks gt;
  gt.dims = expected;
  gt.mask.assign(expected.voxels(), 0);
  for (std::size_t f = 0; f < files.size(); ++f) {
    const auto img = detail::read_image8(files[f], 1);
    if (static_cast<std::size_t>(img.rows) != expected.height ||
        static_cast<std::size_t>(img.cols) != expected.width)
      throw DataError("ground truth size mismatch: " + files[f].filename().string());
    const std::size_t off = f * expected.frame_size();
    for (std::size_t k = 0; k < expected.frame_size(); ++k)
      gt.mask[off + k] = img.px[k] >= 128 ? 1 : 0;
  }
  return gt;
}

}  // namespace salgraph
