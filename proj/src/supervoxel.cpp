#include "salgraph/supervoxel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "binary_io.hpp"
#include "parallel.hpp"
#include "salgraph/error.hpp"

namespace salgraph {

Connectivity connectivity_from_int(int c) {
  if (c == 6) return Connectivity::k6;
  if (c == 26) return Connectivity::k26;
  throw ConfigError("connectivity must be 6 or 26, got " + std::to_string(c));
}

LabelVolume::LabelVolume(Dims dims, std::vector<std::uint32_t> labels)
    : dims_(dims), labels_(std::move(labels)) {
  if (labels_.size() != dims_.voxels())
    throw DataError("label count " + std::to_string(labels_.size()) + " does not match " +
                    to_string(dims_));
  std::uint32_t max_label = 0;
  for (auto l : labels_) max_label = std::max(max_label, l);
  unit_count_ = labels_.empty() ? 0 : static_cast<std::size_t>(max_label) + 1;
  std::vector<char> seen(unit_count_, 0);
  for (auto l : labels_) seen[l] = 1;
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw DataError("labels are not dense in [0, unit_count)");
}

LabelVolume make_dense(Dims dims, const std::vector<std::uint32_t>& raw) {
  std::unordered_map<std::uint32_t, std::uint32_t> remap;
  std::vector<std::uint32_t> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(raw[i], static_cast<std::uint32_t>(remap.size()));
    out[i] = it->second;
  }
  return LabelVolume(dims, std::move(out));
}

void write_lvol(const std::filesystem::path& path, const LabelVolume& labels) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw RuntimeFailure("cannot open " + path.string() + " for writing");
  os.write("LVOL", 4);
  detail::put_u32(os, 1);
  detail::put_u32(os, static_cast<std::uint32_t>(labels.dims().height));
  detail::put_u32(os, static_cast<std::uint32_t>(labels.dims().width));
  detail::put_u32(os, static_cast<std::uint32_t>(labels.dims().frames));
  detail::put_u32(os, static_cast<std::uint32_t>(labels.unit_count()));
  for (auto l : labels.labels()) detail::put_u32(os, l);
  if (!os) throw RuntimeFailure("write failed: " + path.string());
}

LabelVolume read_lvol(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "LVOL")
    throw DataError("bad magic in " + path.string() + " (expected LVOL)");
  if (detail::get_u32(is, "LVOL") != 1) throw DataError("unsupported LVOL version");
  Dims d;
  d.height = detail::get_u32(is, "LVOL");
  d.width = detail::get_u32(is, "LVOL");
  d.frames = detail::get_u32(is, "LVOL");
  const std::size_t declared_units = detail::get_u32(is, "LVOL");
  std::vector<unsigned char> raw(d.voxels() * 4);
  if (!is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
    throw DataError("truncated LVOL payload in " + path.string());
  std::vector<std::uint32_t> labels(d.voxels());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = detail::decode_u32(&raw[4 * i]);
  LabelVolume out(d, std::move(labels));
  if (out.unit_count() != declared_units)
    throw DataError("LVOL header declares " + std::to_string(declared_units) +
                    " units, payload has " + std::to_string(out.unit_count()));
  return out;
}

namespace {

bool edge_less(const WeightedEdge& x, const WeightedEdge& y) {
  if (x.weight != y.weight) return x.weight < y.weight;
  if (x.a != y.a) return x.a < y.a;
  return x.b < y.b;
}

class DisjointSet {
 public:
  explicit DisjointSet(const std::vector<std::size_t>& sizes)
      : parent_(sizes.size()), size_(sizes) {
    std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // Attaches the higher root to the lower so results do not depend on rank.
  std::uint32_t join(std::uint32_t a, std::uint32_t b) {
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return a;
  }
  std::size_t size(std::uint32_t root) const { return size_[root]; }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::size_t> size_;
};

}  // namespace

std::vector<WeightedEdge> build_voxel_graph(const VideoVolume& lab, Connectivity conn) {
  std::vector<WeightedEdge> edges;
  for_each_neighbor_pair(lab.dims(), conn, [&](std::size_t a, std::size_t b) {
    edges.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), 0.0});
  });
  const std::size_t C = lab.channels();
  detail::parallel_for(edges.size(), [&](std::size_t i) {
    const auto x = lab.voxel(edges[i].a), y = lab.voxel(edges[i].b);
    double s = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      const double d = static_cast<double>(x[c]) - static_cast<double>(y[c]);
      s += d * d;
    }
    edges[i].weight = std::sqrt(s);
  });
  std::sort(edges.begin(), edges.end(), edge_less);
  return edges;
}

std::vector<std::uint32_t> fh_merge(const std::vector<WeightedEdge>& sorted_edges,
                                    const std::vector<std::size_t>& sizes, double k,
                                    std::size_t min_size) {
  if (!(k > 0.0)) throw ConfigError("FH threshold k must be > 0");
  const std::size_t n = sizes.size();
  DisjointSet set(sizes);
  std::vector<double> threshold(n);
  for (std::size_t i = 0; i < n; ++i) threshold[i] = k / static_cast<double>(sizes[i]);

  for (const auto& e : sorted_edges) {
    auto a = set.find(e.a), b = set.find(e.b);
    if (a == b) continue;
    if (e.weight <= threshold[a] && e.weight <= threshold[b]) {
      const auto root = set.join(a, b);
      threshold[root] = e.weight + k / static_cast<double>(set.size(root));
    }
  }
  // Ascending order means the first edge that touches an undersized component
  // is its lowest-weight neighbor.
  if (min_size > 1) {
    for (const auto& e : sorted_edges) {
      auto a = set.find(e.a), b = set.find(e.b);
      if (a != b && (set.size(a) < min_size || set.size(b) < min_size)) set.join(a, b);
    }
  }

  std::vector<std::uint32_t> comp(n);
  std::unordered_map<std::uint32_t, std::uint32_t> dense;
  for (std::size_t i = 0; i < n; ++i) {
    const auto root = set.find(static_cast<std::uint32_t>(i));
    auto [it, inserted] = dense.try_emplace(root, static_cast<std::uint32_t>(dense.size()));
    comp[i] = it->second;
  }
  return comp;
}

LabelVolume fh_segment(const std::vector<WeightedEdge>& sorted_edges, const Dims& dims,
                       const FhParams& params) {
  if (params.min_size < 1) throw ConfigError("min_size must be >= 1");
  std::vector<std::size_t> ones(dims.voxels(), 1);
  return LabelVolume(dims, fh_merge(sorted_edges, ones, params.k, params.min_size));
}

SupervoxelHierarchy::SupervoxelHierarchy(std::vector<LabelVolume> layers)
    : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("hierarchy needs at least one layer");
}

const LabelVolume& SupervoxelHierarchy::select_layer(std::size_t index) const {
  if (index < 1 || index > layers_.size())
    throw ConfigError("layer index " + std::to_string(index) + " out of range [1, " +
                      std::to_string(layers_.size()) + "]");
  return layers_[index - 1];
}

double chi_squared(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double sum = x[i] + y[i];
    if (sum > 0.0) {
      const double d = x[i] - y[i];
      s += d * d / sum;
    }
  }
  return 0.5 * s;
}

namespace {

std::size_t lab_bin(std::size_t channel, double v) {
  const double lo = channel == 0 ? 0.0 : -128.0;
  const double hi = channel == 0 ? 100.0 : 128.0;
  const double t = (v - lo) / (hi - lo);
  const auto bin = static_cast<long>(std::floor(t * static_cast<double>(kHistogramBins)));
  return static_cast<std::size_t>(std::clamp<long>(bin, 0, kHistogramBins - 1));
}

}  // namespace

std::vector<std::vector<double>> region_histograms(const VideoVolume& lab,
                                                   const LabelVolume& labels) {
  const std::size_t C = lab.channels();
  std::vector<std::vector<double>> hist(labels.unit_count(),
                                        std::vector<double>(C * kHistogramBins, 0.0));
  std::vector<double> counts(labels.unit_count(), 0.0);
  for (std::size_t v = 0; v < labels.dims().voxels(); ++v) {
    auto& h = hist[labels[v]];
    counts[labels[v]] += 1.0;
    for (std::size_t c = 0; c < C; ++c) h[c * kHistogramBins + lab_bin(c, lab.at(v, c))] += 1.0;
  }
  for (std::size_t u = 0; u < hist.size(); ++u)
    for (double& x : hist[u]) x /= counts[u];
  return hist;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> region_adjacency(const LabelVolume& labels,
                                                                      Connectivity conn) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for_each_neighbor_pair(labels.dims(), conn, [&](std::size_t a, std::size_t b) {
    auto la = labels[a], lb = labels[b];
    if (la == lb) return;
    if (lb < la) std::swap(la, lb);
    pairs.emplace_back(la, lb);
  });
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

SupervoxelHierarchy build_hierarchy(const VideoVolume& lab, const LabelVolume& base,
                                    std::size_t levels, double base_k, Connectivity conn) {
  if (levels < 1) throw ConfigError("hierarchy levels must be >= 1");
  if (lab.dims() != base.dims()) throw DataError("label volume does not match video dims");
  std::vector<LabelVolume> layers{base};
  double k = base_k;
  for (std::size_t level = 1; level < levels; ++level) {
    k *= 2.0;
    const LabelVolume& prev = layers.back();
    const auto hist = region_histograms(lab, prev);
    std::vector<std::size_t> sizes(prev.unit_count(), 0);
    for (auto l : prev.labels()) ++sizes[l];

    std::vector<WeightedEdge> edges;
    for (const auto& [a, b] : region_adjacency(prev, conn))
      edges.push_back({a, b, chi_squared(hist[a], hist[b])});
    std::sort(edges.begin(), edges.end(), edge_less);

    const auto comp = fh_merge(edges, sizes, k, 1);
    std::vector<std::uint32_t> raw(prev.labels().size());
    for (std::size_t v = 0; v < raw.size(); ++v) raw[v] = comp[prev[v]];
    layers.push_back(make_dense(prev.dims(), raw));
  }
  return SupervoxelHierarchy(std::move(layers));
}

SupervoxelHierarchy segment_video(const VideoVolume& lab, const FhParams& params,
                                  std::size_t levels, Connectivity conn) {
  if (levels < 1) throw ConfigError("hierarchy levels must be >= 1");
  const auto edges = build_voxel_graph(lab, conn);
  return build_hierarchy(lab, fh_segment(edges, lab.dims(), params), levels, params.k, conn);
}

}  // namespace salgraph
