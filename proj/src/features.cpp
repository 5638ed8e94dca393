#include "salgraph/features.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "binary_io.hpp"
#include "salgraph/error.hpp"

namespace salgraph {

namespace {

void check_finite(const std::vector<float>& v, const char* what) {
  for (float x : v)
    if (!std::isfinite(x)) throw DataError(std::string("non-finite value in ") + what);
}

}  // namespace

FeatureTensor::FeatureTensor(Dims dims, std::size_t channels)
    : dims_(dims), channels_(channels), values_(dims.voxels() * channels, 0.0f) {}

FeatureTensor::FeatureTensor(Dims dims, std::size_t channels, std::vector<float> values)
    : dims_(dims), channels_(channels), values_(std::move(values)) {
  if (values_.size() != dims_.voxels() * channels_)
    throw DataError("feature tensor payload size does not match its dimensions");
}

FeatureTensor lab_feature_tensor(const VideoVolume& lab) {
  if (lab.color_space() != ColorSpace::kLab || lab.channels() != 3)
    throw DataError("lab_feature_tensor expects a 3-channel LAB volume");
  std::vector<float> values(lab.data().begin(), lab.data().end());
  check_finite(values, "LAB volume");
  return FeatureTensor(lab.dims(), 3, std::move(values));
}

void write_fvol(const std::filesystem::path& path, const FeatureTensor& tensor) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw RuntimeFailure("cannot open " + path.string() + " for writing");
  os.write("FVOL", 4);
  detail::put_u32(os, 1);
  detail::put_u32(os, static_cast<std::uint32_t>(tensor.dims().height));
  detail::put_u32(os, static_cast<std::uint32_t>(tensor.dims().width));
  detail::put_u32(os, static_cast<std::uint32_t>(tensor.dims().frames));
  detail::put_u32(os, static_cast<std::uint32_t>(tensor.channels()));
  os.put(static_cast<char>(kFvolFloat32));
  for (float f : tensor.values()) detail::put_f32(os, f);
  if (!os) throw RuntimeFailure("write failed: " + path.string());
}

FeatureTensor read_fvol(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "FVOL")
    throw DataError("bad magic in " + path.string() + " (expected FVOL)");
  if (detail::get_u32(is, "FVOL") != 1) throw DataError("unsupported FVOL version");
  Dims d;
  d.height = detail::get_u32(is, "FVOL");
  d.width = detail::get_u32(is, "FVOL");
  d.frames = detail::get_u32(is, "FVOL");
  const std::size_t C = detail::get_u32(is, "FVOL");
  const int dtype = is.get();
  if (!is) throw DataError("truncated FVOL header in " + path.string());
  if (dtype != kFvolFloat32) throw DataError("unsupported FVOL dtype " + std::to_string(dtype));
  if (d.voxels() == 0 || C == 0) throw DataError("FVOL with empty dimensions");

  const std::size_t count = d.voxels() * C;
  std::vector<unsigned char> raw(count * 4);
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(is.gcount()) != raw.size())
    throw DataError("truncated FVOL payload in " + path.string());
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) values[i] = detail::decode_f32(&raw[4 * i]);
  check_finite(values, path.string().c_str());
  return FeatureTensor(d, C, std::move(values));
}

FeatureTensor read_feature_tensor(const std::filesystem::path& path, const Dims& expected) {
  FeatureTensor t = read_fvol(path);
  if (t.dims() != expected)
    throw DataError("dimension mismatch: " + path.string() + " is " + to_string(t.dims()) +
                    ", video is " + to_string(expected));
  return t;
}

UnitFeatureTable pool_unit_features(const FeatureTensor& tensor, const LabelVolume& labels) {
  if (tensor.dims() != labels.dims())
    throw DataError("feature tensor " + to_string(tensor.dims()) + " does not match labels " +
                    to_string(labels.dims()));
  const std::size_t N = labels.unit_count(), C = tensor.channels();
  const Dims& d = labels.dims();

  UnitFeatureTable table{N, C, std::vector<double>(N * C, 0.0)};
  std::vector<std::size_t> frames_present(N, 0);
  std::vector<double> frame_max(N * C);
  std::vector<char> present(N);

  for (std::size_t f = 0; f < d.frames; ++f) {
    std::fill(frame_max.begin(), frame_max.end(), -std::numeric_limits<double>::infinity());
    std::fill(present.begin(), present.end(), 0);
    const std::size_t begin = f * d.frame_size(), end = begin + d.frame_size();
    for (std::size_t v = begin; v < end; ++v) {
      const auto u = labels[v];
      present[u] = 1;
      const auto x = tensor.voxel(v);
      double* m = &frame_max[u * C];
      for (std::size_t c = 0; c < C; ++c) m[c] = std::max(m[c], static_cast<double>(x[c]));
    }
    for (std::size_t u = 0; u < N; ++u) {
      if (!present[u]) continue;
      ++frames_present[u];
      for (std::size_t c = 0; c < C; ++c) table.values[u * C + c] += frame_max[u * C + c];
    }
  }
  for (std::size_t u = 0; u < N; ++u) {
    if (frames_present[u] == 0)
      throw DataError("unit " + std::to_string(u) + " has no voxels");
    for (std::size_t c = 0; c < C; ++c)
      table.values[u * C + c] /= static_cast<double>(frames_present[u]);
  }
  return table;
}

}  // namespace salgraph
