#include "image_io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <fstream>

#include "salgraph/error.hpp"

namespace salgraph::detail {

Image8 read_image8(const std::filesystem::path& path, int want_channels) {
  cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (raw.empty()) throw DataError("undecodable image: " + path.string());
  if (raw.depth() != CV_8U)
    throw DataError("only 8-bit images are supported: " + path.string());

  cv::Mat out;
  const int cn = raw.channels();
  if (want_channels == 3) {
    if (cn == 1) cv::cvtColor(raw, out, cv::COLOR_GRAY2RGB);
    else if (cn == 3) cv::cvtColor(raw, out, cv::COLOR_BGR2RGB);
    else if (cn == 4) cv::cvtColor(raw, out, cv::COLOR_BGRA2RGB);
    else throw DataError("unsupported channel count in " + path.string());
  } else {
    if (cn == 1) out = raw;
    else if (cn == 3) cv::cvtColor(raw, out, cv::COLOR_BGR2GRAY);
    else if (cn == 4) cv::cvtColor(raw, out, cv::COLOR_BGRA2GRAY);
    else throw DataError("unsupported channel count in " + path.string());
  }

  Image8 img;
  img.rows = out.rows;
  img.cols = out.cols;
  img.channels = want_channels;
  img.px.resize(static_cast<std::size_t>(out.rows) * out.cols * want_channels);
  for (int r = 0; r < out.rows; ++r) {
    const auto* src = out.ptr<std::uint8_t>(r);
    std::copy(src, src + out.cols * want_channels,
              img.px.begin() + static_cast<std::ptrdiff_t>(r) * out.cols * want_channels);
  }
  return img;
}

void write_png8(const std::filesystem::path& path, const Image8& img) {
  const int type = img.channels == 3 ? CV_8UC3 : CV_8UC1;
  cv::Mat m(img.rows, img.cols, type, const_cast<std::uint8_t*>(img.px.data()));
  cv::Mat bgr;
  if (img.channels == 3) cv::cvtColor(m, bgr, cv::COLOR_RGB2BGR);
  else bgr = m;
  std::vector<std::uint8_t> bytes;
  if (!cv::imencode(".png", bgr, bytes, {cv::IMWRITE_PNG_COMPRESSION, 6}))
    throw RuntimeFailure("cannot encode " + path.string());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw RuntimeFailure("cannot write " + path.string());
}

}  // namespace salgraph::detail
